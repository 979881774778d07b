/** Wire types mirroring the session service responses, field for field. */

export interface SessionInfo {
  session_id: string;
  record_id: string;
  question: string;
  description: string;
}

export interface CandidateView {
  index: number;
  kind: "click" | "stop";
  description: string;
  image_url: string | null;
}

export interface ObservationView {
  session_id: string;
  record_id: string;
  page_id: string;
  screenshot_url: string | null;
  step: number;
  done: boolean;
  forced_stop: boolean;
  candidates: CandidateView[];
}

export interface ScorePanel {
  sr: number;
  osr: number;
  spl: number;
  tl: number;
  wups09: number;
  wups00: number;
}

export interface AnswerResponse {
  trajectory_id: string;
  trajectory: {
    record_id: string;
    visited: string[];
    action_indices: number[];
    stopped_page_id: string;
    answer: string;
    forced_stop: boolean;
  };
  scores: ScorePanel;
}

/** One audit entry per user-visible interaction the controller performed. */
export type AuditEvent =
  | { type: "session-created"; sessionId: string; recordId: string }
  | { type: "action-sent"; index: number }
  | { type: "action-rejected-busy"; index: number }
  | { type: "answer-sent"; text: string }
  | { type: "server-error"; status: number; detail: string };
