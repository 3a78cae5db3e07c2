import { describe, expect, it } from "vitest";

import { EventStreamClient, SseParser } from "../src/sse.js";
import type { SessionEventPayload } from "../src/types.js";

function frame(event: Partial<SessionEventPayload>): string {
  return `id: ${event.sequence}\ndata: ${JSON.stringify(event)}\n\n`;
}

function streamResponse(chunks: string[], failAfter = false): Response {
  const encoder = new TextEncoder();
  let index = 0;
  const body = new ReadableStream<Uint8Array>({
    pull(controller) {
      if (index < chunks.length) {
        controller.enqueue(encoder.encode(chunks[index]));
        index += 1;
      } else if (failAfter) {
        controller.error(new Error("connection dropped"));
      } else {
        controller.close();
      }
    },
  });
  return new Response(body, { status: 200, headers: { "Content-Type": "text/event-stream" } });
}

describe("SseParser", () => {
  it("parses frames split across arbitrary chunk boundaries", () => {
    const parser = new SseParser();
    const full = 'data: {"a": 1}\n\ndata: {"b": 2}\n\n';
    const frames = [...parser.push(full.slice(0, 9)), ...parser.push(full.slice(9))];
    expect(frames.map((f) => f.data)).toEqual(['{"a": 1}', '{"b": 2}']);
  });

  it("ignores keep-alive comment frames", () => {
    const parser = new SseParser();
    expect(parser.push(": keep-alive\n\n")).toEqual([]);
  });

  it("collects multi-line data and event names", () => {
    const parser = new SseParser();
    const frames = parser.push("event: note\ndata: one\ndata: two\n\n");
    expect(frames).toEqual([{ event: "note", data: "one\ntwo" }]);
  });
});

describe("EventStreamClient", () => {
  const ev = (sequence: number, kind: SessionEventPayload["kind"]): SessionEventPayload => ({
    sessionId: "s1",
    sequence,
    kind,
    payload: {},
    timestamp: sequence,
  });

  it("delivers events and stops at session-ended", async () => {
    const calls: string[] = [];
    const fetchFn = (async (url: RequestInfo | URL) => {
      calls.push(String(url));
      return streamResponse([frame(ev(1, "session-created")), frame(ev(2, "session-ended"))]);
    }) as typeof fetch;

    const seen: number[] = [];
    const client = new EventStreamClient("http://svc", "s1", {
      onEvent: (e) => seen.push(e.sequence),
    }, { fetchFn, retryDelayMs: 1 });
    await client.run();
    expect(seen).toEqual([1, 2]);
    expect(calls).toEqual(["http://svc/sessions/s1/events?after=0"]);
  });

  it("reconnects after a drop, reconciles, and resumes from the last sequence", async () => {
    const calls: string[] = [];
    let connection = 0;
    const fetchFn = (async (url: RequestInfo | URL) => {
      calls.push(String(url));
      connection += 1;
      if (connection === 1) {
        return streamResponse([frame(ev(1, "session-created")), frame(ev(2, "user-message"))], true);
      }
      return streamResponse([frame(ev(3, "agent-message")), frame(ev(4, "session-ended"))]);
    }) as typeof fetch;

    const seen: number[] = [];
    let reconciled = 0;
    const client = new EventStreamClient("http://svc", "s1", {
      onEvent: (e) => seen.push(e.sequence),
      onReconnect: () => {
        reconciled += 1;
      },
    }, { fetchFn, retryDelayMs: 1 });
    await client.run();
    expect(seen).toEqual([1, 2, 3, 4]);
    expect(reconciled).toBe(1);
    expect(calls[1]).toBe("http://svc/sessions/s1/events?after=2");
  });

  it("gives up after maxReconnects failures", async () => {
    let attempts = 0;
    const fetchFn = (async () => {
      attempts += 1;
      return new Response(null, { status: 503 });
    }) as typeof fetch;
    const client = new EventStreamClient("http://svc", "s1", { onEvent: () => {} }, {
      fetchFn,
      retryDelayMs: 1,
      maxReconnects: 2,
    });
    await client.run();
    expect(attempts).toBe(3);
  });
});
