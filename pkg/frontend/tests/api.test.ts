import { describe, expect, it } from "vitest";

import { HttpError, HttpTransport } from "../src/api.js";
import type { Decision } from "../src/types.js";

function jsonResponse(body: unknown, status = 200): Response {
	return new Response(JSON.stringify(body), {
		status,
		headers: { "Content-Type": "application/json" },
	});
}

describe("HttpTransport", () => {
	it("hits the documented queue endpoints", async () => {
		const calls: Array<{ url: string; init?: RequestInit }> = [];
		const transport = new HttpTransport("", async (url, init) => {
			calls.push({ url, init });
			return jsonResponse({ queue_id: "q", page: 1, size: 10, items: [], progress: { decided: 0, total: 0 } });
		});
		await transport.getQueue("my queue", 1, 10);
		expect(calls[0].url).toBe("/api/queues/my%20queue?page=1&size=10");
	});

	it("posts decisions as JSON bodies", async () => {
		let captured: RequestInit | undefined;
		const transport = new HttpTransport("http://svc", async (url, init) => {
			captured = init;
			expect(url).toBe("http://svc/api/queues/q/decisions");
			return jsonResponse({ ok: true, appended: true, progress: { decided: 1, total: 2 } });
		});
		const decision: Decision = {
			item_id: "a",
			verdict: "accept",
			reviewer: "me",
			timestamp: 12.5,
		};
		const result = await transport.postDecision("q", decision);
		expect(result.appended).toBe(true);
		expect(captured?.method).toBe("POST");
		expect(JSON.parse(String(captured?.body))).toEqual(decision);
	});

	it("maps HTTP rejections to HttpError with the server detail", async () => {
		const transport = new HttpTransport("", async () =>
			jsonResponse({ detail: "unknown queue 'x'" }, 404),
		);
		await expect(transport.getQueues()).rejects.toThrowError(HttpError);
		await expect(transport.getQueues()).rejects.toThrow(/unknown queue/);
	});

	it("lets network failures propagate untouched", async () => {
		const transport = new HttpTransport("", async () => {
			throw new TypeError("fetch failed");
		});
		await expect(transport.getQueues()).rejects.toThrowError(TypeError);
	});
});
