/** Typed client for the session engine HTTP API. */

import type {
  CreateSessionResponse,
  FeedbackPayload,
  SeedForm,
  StatePanels,
  TurnPayload,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`api error ${status}: ${detail}`);
  }
}

export class EngineClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(seed: SeedForm, sessionId?: string): Promise<CreateSessionResponse> {
    const body: Record<string, unknown> = { seed };
    if (sessionId) body.session_id = sessionId;
    return this.post("/sessions", body);
  }

  sendMessage(sessionId: string, text: string): Promise<TurnPayload> {
    return this.post(`/sessions/${sessionId}/messages`, { text });
  }

  sendChoice(sessionId: string, choice: number | string): Promise<TurnPayload> {
    return this.post(`/sessions/${sessionId}/choices`, { choice });
  }

  state(sessionId: string): Promise<StatePanels> {
    return this.request(`/sessions/${sessionId}/state`);
  }

  trace(sessionId: string): Promise<string> {
    return this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/trace`).then((r) => r.text());
  }

  submitFeedback(sessionId: string, payload: FeedbackPayload): Promise<{ recorded: boolean }> {
    return this.post(`/sessions/${sessionId}/feedback`, payload);
  }

  streamUrl(sessionId: string, after = 0): string {
    return `${this.baseUrl}/sessions/${sessionId}/stream?after=${after}`;
  }
}
