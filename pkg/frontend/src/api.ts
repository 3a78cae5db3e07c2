// Thin typed client for the session service HTTP API.

import type {
  Condition,
  ModalChoice,
  SessionPayload,
  TurnPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  private readonly fetchFn: typeof fetch;

  constructor(
    readonly baseUrl: string,
    fetchFn?: typeof fetch,
  ) {
    this.fetchFn = fetchFn ?? fetch.bind(globalThis);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) {
          detail = body.error;
        }
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(taskId: string, condition: Condition): Promise<SessionPayload> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ taskId, condition }),
    });
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return this.request(`/sessions/${sessionId}`);
  }

  postMessage(sessionId: string, text: string): Promise<TurnPayload> {
    return this.request(`/sessions/${sessionId}/messages`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  /**
   * Post the user's modal choice. A failed post is retried with the same
   * choice so a flaky connection cannot flip the user's decision.
   */
  async postModal(
    sessionId: string,
    choice: ModalChoice,
    attempts = 3,
    retryDelayMs = 500,
  ): Promise<SessionPayload> {
    let lastError: unknown;
    for (let attempt = 0; attempt < attempts; attempt += 1) {
      try {
        return await this.request<SessionPayload>(`/sessions/${sessionId}/modal`, {
          method: "POST",
          body: JSON.stringify({ choice }),
        });
      } catch (error) {
        if (error instanceof ApiError && error.status !== 502 && error.status < 500) {
          throw error; // a 4xx will not succeed on retry
        }
        lastError = error;
        if (attempt + 1 < attempts) {
          await new Promise((resolve) => setTimeout(resolve, retryDelayMs));
        }
      }
    }
    throw lastError;
  }

  endSession(sessionId: string, outcome: "completed" | "abandoned"): Promise<SessionPayload> {
    return this.request(`/sessions/${sessionId}/end`, {
      method: "POST",
      body: JSON.stringify({ outcome }),
    });
  }
}
