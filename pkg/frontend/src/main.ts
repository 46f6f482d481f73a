import { HttpTransport } from "./api.js";
import { ReviewSession, switchQueue } from "./state.js";
import type { QueueInfo, Verdict } from "./types.js";

const transport = new HttpTransport("");
let session: ReviewSession | null = null;

const $ = <T extends HTMLElement>(id: string): T => {
	const el = document.getElementById(id);
	if (!el) throw new Error(`missing element #${id}`);
	return el as T;
};

function reviewerName(): string {
	let name = localStorage.getItem("reviewer") ?? "";
	while (!name) {
		name = (prompt("Reviewer name:") ?? "").trim();
	}
	localStorage.setItem("reviewer", name);
	return name;
}

function setBanner(message: string | null): void {
	const banner = $("banner");
	banner.textContent = message ?? "";
	banner.style.display = message ? "block" : "none";
}

function renderQueues(queues: QueueInfo[]): void {
	const select = $<HTMLSelectElement>("queue-select");
	select.innerHTML = "";
	for (const q of queues) {
		const option = document.createElement("option");
		option.value = q.queue_id;
		option.textContent = `${q.queue_id} (${q.decided}/${q.total})`;
		select.appendChild(option);
	}
}

function render(): void {
	const pending = $("pending");
	if (!session) return;
	const { decided, total } = session.progress;
	$("progress-label").textContent = `${decided} / ${total}`;
	const bar = $<HTMLProgressElement>("progress-bar");
	bar.max = total || 1;
	bar.value = decided;
	pending.textContent =
		session.pendingCount > 0 ? `${session.pendingCount} pending` : "";
	setBanner(session.lastError);

	const card = $("card");
	const doneBox = $("done");
	const item = session.current();
	if (item === null) {
		card.style.display = "none";
		doneBox.style.display = "block";
		doneBox.textContent = session.done
			? "Nothing to review: queue complete."
			: "Waiting on pending decisions…";
		return;
	}
	card.style.display = "block";
	doneBox.style.display = "none";
	$("label").textContent = item.label;
	$("reason").textContent = item.reason;
	$("item-id").textContent = item.item_id;
	const img = $<HTMLImageElement>("image");
	if (item.thumbnail_ref) {
		img.src = item.thumbnail_ref;
		img.style.display = "block";
	} else {
		img.removeAttribute("src");
		img.style.display = "none";
	}
}

async function decideAndSync(verdict: Verdict): Promise<void> {
	if (!session || session.current() === null) return;
	session.decide(verdict);
	render();
	await session.flush();
	if (session.items.length === 0) {
		// page exhausted: pull the next batch of undecided items
		await session.refresh().catch(() => undefined);
	}
	render();
}

async function selectQueue(queueId: string): Promise<void> {
	try {
		session = await switchQueue(session, transport, queueId, reviewerName());
		setBanner(null);
	} catch (err) {
		setBanner(err instanceof Error ? err.message : String(err));
	}
	render();
}

function bindKeys(): void {
	document.addEventListener("keydown", (ev) => {
		if (ev.target instanceof HTMLInputElement) return;
		const key = ev.key.toLowerCase();
		if (key === "a") void decideAndSync("accept");
		else if (key === "r") void decideAndSync("reject");
		else if (key === "s") void decideAndSync("skip");
		else if (key === "arrowright" && session) {
			session.next();
			render();
		} else if (key === "arrowleft" && session) {
			session.prev();
			render();
		} else {
			return;
		}
		ev.preventDefault();
	});
}

async function boot(): Promise<void> {
	bindKeys();
	$<HTMLSelectElement>("queue-select").addEventListener("change", (ev) => {
		void selectQueue((ev.target as HTMLSelectElement).value);
	});
	for (const [id, verdict] of [
		["btn-accept", "accept"],
		["btn-reject", "reject"],
		["btn-skip", "skip"],
	] as const) {
		$(id).addEventListener("click", () => void decideAndSync(verdict));
	}
	// background retry keeps buffered decisions flowing after an outage
	setInterval(() => {
		if (session && session.pendingCount > 0) {
			void session.flush().then(render);
		}
	}, 2000);
	try {
		const queues = await transport.getQueues();
		renderQueues(queues);
		if (queues.length > 0) {
			await selectQueue(queues[0].queue_id);
		} else {
			setBanner("No queues found on the review service.");
		}
	} catch {
		setBanner("Review service unreachable. Retry once it is up.");
		$("retry").style.display = "inline-block";
	}
	$("retry").addEventListener("click", () => void boot());
	render();
}

void boot();
