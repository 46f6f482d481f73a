export type Verdict = "accept" | "reject" | "skip";

export interface QueueItem {
	item_id: string;
	image_ref: string;
	label: string;
	reason: string;
	thumbnail_ref?: string | null;
}

export interface Progress {
	decided: number;
	total: number;
}

export interface QueueInfo {
	queue_id: string;
	decided: number;
	total: number;
}

export interface QueuePage {
	queue_id: string;
	page: number;
	size: number;
	items: QueueItem[];
	progress: Progress;
}

export interface Decision {
	item_id: string;
	verdict: Verdict;
	reviewer: string;
	timestamp: number;
}

export interface PostResult {
	ok: boolean;
	appended: boolean;
	progress: Progress;
}

/** The review-service HTTP contract, injectable for tests. */
export interface Transport {
	getQueues(): Promise<QueueInfo[]>;
	getQueue(queueId: string, page: number, size: number): Promise<QueuePage>;
	postDecision(queueId: string, decision: Decision): Promise<PostResult>;
}
