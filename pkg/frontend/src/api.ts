import type { Decision, PostResult, QueueInfo, QueuePage, Transport } from "./types.js";

/** Raised for HTTP-level rejections (4xx/5xx); network failures surface as
 * the fetch rejection itself so callers can tell "retry later" apart from
 * "the server said no". */
export class HttpError extends Error {
	constructor(public status: number, message: string) {
		super(message);
	}
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpTransport implements Transport {
	constructor(
		private baseUrl: string = "",
		private fetchImpl: FetchLike = (input, init) => fetch(input, init),
	) {}

	private async json<T>(resp: Response): Promise<T> {
		if (!resp.ok) {
			let detail = resp.statusText;
			try {
				const body = await resp.json();
				if (body && typeof body.detail === "string") detail = body.detail;
			} catch {
				/* non-JSON error body */
			}
			throw new HttpError(resp.status, detail);
		}
		return (await resp.json()) as T;
	}

	async getQueues(): Promise<QueueInfo[]> {
		return this.json(await this.fetchImpl(`${this.baseUrl}/api/queues`));
	}

	async getQueue(queueId: string, page: number, size: number): Promise<QueuePage> {
		const url = `${this.baseUrl}/api/queues/${encodeURIComponent(queueId)}?page=${page}&size=${size}`;
		return this.json(await this.fetchImpl(url));
	}

	async postDecision(queueId: string, decision: Decision): Promise<PostResult> {
		const url = `${this.baseUrl}/api/queues/${encodeURIComponent(queueId)}/decisions`;
		return this.json(
			await this.fetchImpl(url, {
				method: "POST",
				headers: { "Content-Type": "application/json" },
				body: JSON.stringify(decision),
			}),
		);
	}
}
