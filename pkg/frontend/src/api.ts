/** Thin typed client for the session service. All state lives server-side. */

import type { AnswerResponse, ObservationView, SessionInfo } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.detail === "string" ? body.detail : JSON.stringify(body);
  } catch {
    return response.statusText;
  }
}

export class SessionApi {
  constructor(
    private baseUrl: string = "",
    private token: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["X-Auth-Token"] = this.token;
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await parseDetail(response));
    }
    return (await response.json()) as T;
  }

  createSession(options: { split?: string; record_id?: string; owner?: string } = {}): Promise<SessionInfo> {
    return this.request<SessionInfo>("POST", "/sessions", { owner: "human", ...options });
  }

  observation(sessionId: string): Promise<ObservationView> {
    return this.request<ObservationView>("GET", `/sessions/${sessionId}/observation`);
  }

  action(sessionId: string, index: number): Promise<ObservationView> {
    return this.request<ObservationView>("POST", `/sessions/${sessionId}/action`, { index });
  }

  answer(sessionId: string, text: string): Promise<AnswerResponse> {
    return this.request<AnswerResponse>("POST", `/sessions/${sessionId}/answer`, { text });
  }
}
