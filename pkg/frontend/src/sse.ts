// Server-sent-events client over fetch with reconnect and resume.
//
// The server streams SessionEvents with monotone sequence ids. On a
// dropped connection we ask the caller to reconcile from GET session
// state, then resume the stream from the last sequence we saw; the
// progress reducer's dedup makes redelivery safe.

import type { SessionEventPayload } from "./types.js";

export interface SseFrame {
  event: string;
  data: string;
}

/** Incremental text/event-stream parser; feed chunks, get whole frames. */
export class SseParser {
  private buffer = "";

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const parts = this.buffer.split(/\r?\n\r?\n/);
    this.buffer = parts.pop() ?? "";
    const frames: SseFrame[] = [];
    for (const part of parts) {
      let event = "message";
      const dataLines: string[] = [];
      for (const line of part.split(/\r?\n/)) {
        if (line.startsWith("event:")) {
          event = line.slice(6).trim();
        } else if (line.startsWith("data:")) {
          dataLines.push(line.slice(5).trim());
        }
        // comment lines (keep-alives) start with ":" and are ignored
      }
      if (dataLines.length > 0) {
        frames.push({ event, data: dataLines.join("\n") });
      }
    }
    return frames;
  }
}

export interface StreamHandlers {
  onEvent: (event: SessionEventPayload) => void;
  /** Called after a connection drop, before the stream resumes. */
  onReconnect?: () => Promise<void> | void;
  onClosed?: () => void;
}

export interface StreamOptions {
  fetchFn?: typeof fetch;
  retryDelayMs?: number;
  maxReconnects?: number;
}

export class EventStreamClient {
  private lastSequence = 0;
  private stopped = false;
  private readonly fetchFn: typeof fetch;
  private readonly retryDelayMs: number;
  private readonly maxReconnects: number;

  constructor(
    private readonly baseUrl: string,
    private readonly sessionId: string,
    private readonly handlers: StreamHandlers,
    options: StreamOptions = {},
  ) {
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.maxReconnects = options.maxReconnects ?? Infinity;
  }

  stop(): void {
    this.stopped = true;
  }

  get resumeFrom(): number {
    return this.lastSequence;
  }

  async run(): Promise<void> {
    let reconnects = 0;
    while (!this.stopped) {
      try {
        const ended = await this.streamOnce();
        if (ended) {
          break; // server closed after session-ended: nothing more to read
        }
      } catch {
        // fall through to reconnect
      }
      if (this.stopped || reconnects >= this.maxReconnects) {
        break;
      }
      reconnects += 1;
      await delay(this.retryDelayMs);
      await this.handlers.onReconnect?.();
    }
    this.handlers.onClosed?.();
  }

  /** One connection; resolves true when the session ended cleanly. */
  private async streamOnce(): Promise<boolean> {
    const url = `${this.baseUrl}/sessions/${this.sessionId}/events?after=${this.lastSequence}`;
    const response = await this.fetchFn(url, { headers: { Accept: "text/event-stream" } });
    if (!response.ok || !response.body) {
      throw new Error(`event stream failed: HTTP ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    let sessionEnded = false;
    while (true) {
      const { value, done } = await reader.read();
      if (done) {
        break;
      }
      for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
        const event = JSON.parse(frame.data) as SessionEventPayload;
        if (event.sequence > this.lastSequence) {
          this.lastSequence = event.sequence;
        }
        this.handlers.onEvent(event);
        if (event.kind === "session-ended") {
          sessionEnded = true;
        }
      }
    }
    return sessionEnded;
  }
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
