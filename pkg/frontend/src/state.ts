import { HttpError } from "./api.js";
import type { Decision, Progress, QueueItem, Transport, Verdict } from "./types.js";

/** One reviewer working one queue.
 *
 * Decisions buffer locally and flush in order; a network failure leaves
 * the unacknowledged tail in the buffer for retry. Each decision's
 * (item_id, timestamp) pair is fixed when the key is pressed, so a retry
 * after a half-delivered request is deduplicated server-side: every
 * keystroke reaches the log exactly once or stays visibly pending.
 */
export class ReviewSession {
	items: QueueItem[] = [];
	index = 0;
	buffer: Decision[] = [];
	progress: Progress = { decided: 0, total: 0 };
	lastError: string | null = null;
	loaded = false;

	private flushing = false;

	constructor(
		private transport: Transport,
		readonly queueId: string,
		readonly reviewer: string,
		private pageSize: number = 50,
		private now: () => number = () => Date.now() / 1000,
	) {}

	/** Fetch the first page of undecided items; items keep server order. */
	async load(): Promise<void> {
		const page = await this.transport.getQueue(this.queueId, 0, this.pageSize);
		this.items = page.items;
		this.index = 0;
		this.progress = page.progress;
		this.loaded = true;
		this.lastError = null;
	}

	current(): QueueItem | null {
		return this.items[this.index] ?? null;
	}

	/** True once every loaded item is decided and every decision is acked. */
	get done(): boolean {
		return this.loaded && this.items.length === 0 && this.buffer.length === 0;
	}

	get pendingCount(): number {
		return this.buffer.length;
	}

	next(): void {
		if (this.index < this.items.length - 1) this.index += 1;
	}

	prev(): void {
		if (this.index > 0) this.index -= 1;
	}

	/** Buffer a verdict for the focused item and advance the focus.
	 * Returns the buffered record, or null when nothing is focused. */
	decide(verdict: Verdict): Decision | null {
		const item = this.current();
		if (item === null) return null;
		const decision: Decision = {
			item_id: item.item_id,
			verdict,
			reviewer: this.reviewer,
			timestamp: this.now(),
		};
		this.buffer.push(decision);
		// optimistic advance; the item stays in `items` until the next load
		this.items.splice(this.index, 1);
		if (this.index >= this.items.length && this.items.length > 0) {
			this.index = this.items.length - 1;
		}
		return decision;
	}

	/** Drain the buffer in order. Stops (keeping the tail) on a network
	 * failure; an HTTP rejection is surfaced and the record dropped, since
	 * resending it can never succeed. Returns true when the buffer emptied. */
	async flush(): Promise<boolean> {
		if (this.flushing) return this.buffer.length === 0;
		this.flushing = true;
		try {
			while (this.buffer.length > 0) {
				const head = this.buffer[0];
				try {
					const result = await this.transport.postDecision(this.queueId, head);
					this.progress = result.progress;
					this.buffer.shift();
					this.lastError = null;
				} catch (err) {
					if (err instanceof HttpError) {
						this.buffer.shift();
						this.lastError = `server rejected decision for ${head.item_id}: ${err.message}`;
					} else {
						this.lastError = "network unreachable; decisions kept pending";
						return false;
					}
				}
			}
			return true;
		} finally {
			this.flushing = false;
		}
	}

	/** Flush, then refetch the page. The completion state is an empty
	 * reload with nothing pending. */
	async refresh(): Promise<void> {
		await this.flush();
		if (this.buffer.length === 0) await this.load();
	}
}

/** Buffer must be flushed before a queue switch; with the service down the
 * switch is refused rather than dropping keystrokes. */
export async function switchQueue(
	session: ReviewSession | null,
	transport: Transport,
	queueId: string,
	reviewer: string,
): Promise<ReviewSession> {
	if (session && session.pendingCount > 0) {
		const drained = await session.flush();
		if (!drained) {
			throw new Error(
				`cannot switch queues: ${session.pendingCount} decisions still pending`,
			);
		}
	}
	const next = new ReviewSession(transport, queueId, reviewer);
	await next.load();
	return next;
}
