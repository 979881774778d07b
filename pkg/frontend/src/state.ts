/** Session controller: the single state machine behind the view.
 *
 * Every state change comes from a server response; nothing is applied
 * optimistically.  Requests are serialized client-side: while one is in
 * flight, further clicks are rejected (and audited), so a double click
 * produces a single transition.  The audit log records exactly the action
 * sequence sent to the server.
 */

import { ApiError, SessionApi } from "./api.js";
import type {
  AnswerResponse,
  AuditEvent,
  ObservationView,
  ScorePanel,
  SessionInfo,
} from "./types.js";

export type Phase = "idle" | "navigating" | "answering" | "scored";

export interface ControllerState {
  phase: Phase;
  session: SessionInfo | null;
  observation: ObservationView | null;
  scores: ScorePanel | null;
  trajectoryId: string | null;
  error: string | null;
  busy: boolean;
}

export class SessionController {
  private state: ControllerState = {
    phase: "idle",
    session: null,
    observation: null,
    scores: null,
    trajectoryId: null,
    error: null,
    busy: false,
  };
  private listeners: Array<(state: ControllerState) => void> = [];
  readonly audit: AuditEvent[] = [];

  constructor(private api: SessionApi) {}

  getState(): ControllerState {
    return { ...this.state };
  }

  onChange(listener: (state: ControllerState) => void): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<ControllerState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.getState());
  }

  /** Actions actually sent, in order; the audit contract for trajectories. */
  sentActionIndices(): number[] {
    return this.audit
      .filter((event): event is Extract<AuditEvent, { type: "action-sent" }> =>
        event.type === "action-sent")
      .map((event) => event.index);
  }

  async start(options: { split?: string; record_id?: string } = {}): Promise<void> {
    if (this.state.busy) return;
    this.update({ busy: true, error: null, scores: null, trajectoryId: null });
    try {
      const session = await this.api.createSession(options);
      this.audit.push({
        type: "session-created",
        sessionId: session.session_id,
        recordId: session.record_id,
      });
      const observation = await this.api.observation(session.session_id);
      this.update({ phase: "navigating", session, observation, busy: false });
    } catch (error) {
      this.fail(error);
    }
  }

  /** Click a candidate (a button or the stop entry). */
  async submitAction(index: number): Promise<void> {
    const { session, observation } = this.state;
    if (!session || !observation || this.state.phase !== "navigating") return;
    if (this.state.busy) {
      this.audit.push({ type: "action-rejected-busy", index });
      return;
    }
    this.update({ busy: true, error: null });
    this.audit.push({ type: "action-sent", index });
    try {
      const next = await this.api.action(session.session_id, index);
      this.update({
        observation: next,
        phase: next.done ? "answering" : "navigating",
        busy: false,
      });
    } catch (error) {
      this.fail(error);
    }
  }

  async submitAnswer(text: string): Promise<AnswerResponse | null> {
    const { session } = this.state;
    if (!session || this.state.phase !== "answering" || this.state.busy) return null;
    this.update({ busy: true, error: null });
    this.audit.push({ type: "answer-sent", text });
    try {
      const result = await this.api.answer(session.session_id, text);
      this.update({
        phase: "scored",
        scores: result.scores,
        trajectoryId: result.trajectory_id,
        busy: false,
      });
      return result;
    } catch (error) {
      this.fail(error);
      return null;
    }
  }

  /** Re-fetch the observation (screenshot retry, reconnects). */
  async refresh(): Promise<void> {
    const { session } = this.state;
    if (!session || this.state.busy) return;
    this.update({ busy: true });
    try {
      const observation = await this.api.observation(session.session_id);
      this.update({ observation, busy: false });
    } catch (error) {
      this.fail(error);
    }
  }

  private fail(error: unknown): void {
    if (error instanceof ApiError) {
      this.audit.push({ type: "server-error", status: error.status, detail: error.detail });
      this.update({ error: error.detail, busy: false });
    } else {
      this.update({ error: String(error), busy: false });
    }
  }
}
