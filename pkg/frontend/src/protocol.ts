/** Wire messages exchanged with the session service over /ws. */

export interface LandingAnimation {
  landing: number;
  remainingS: number;
}

export interface Prompt {
  kind: "phase" | "foot";
  phase?: string;
  toPosition?: number;
}

export interface StateSnapshot {
  type: "state";
  phase: string;
  phaseName: string | null;
  cursorPosition: number | null;
  renderedForce: number;
  elongationHidden: boolean;
  cubeVisible: boolean;
  sphereVisible: boolean;
  trialScore: number;
  totalScore: number;
  shotNumber: number | null;
  trialIndex: number | null;
  landingAnimation: LandingAnimation | null;
  prompt: Prompt | null;
  paused: boolean;
  done: boolean;
  day: number;
  cursor: number;
}

export interface ShotResult {
  type: "shot_result";
  landing: number;
  points: number;
  animationS: number;
  shotNumber: number;
}

export interface TrialSummary {
  type: "trial_summary";
  aggregate: {
    participant_id: string;
    phase: string;
    trial_index: number;
    n_shots: number;
    mean_abs_force_error_n: number | null;
    force_sd_n: number | null;
    mean_abs_elongation_error_mm: number | null;
    trial_score: number;
  };
}

export interface Hello {
  type: "hello";
  role: string;
  participant: string;
}

export interface Ack {
  type: "ack";
  command?: string;
  cursor?: number;
  [key: string]: unknown;
}

export interface ErrorMessage {
  type: "error";
  error: string;
  detail?: string;
}

export type ServerMessage =
  | StateSnapshot
  | ShotResult
  | TrialSummary
  | Hello
  | Ack
  | ErrorMessage;

export type ClientMessage =
  | { type: "move"; x: number }
  | { type: "button_down" }
  | { type: "button_up" }
  | {
      type: "experimenter";
      command: "advance" | "pause" | "assign_condition";
      condition?: string;
    };

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (
    type === "state" ||
    type === "shot_result" ||
    type === "trial_summary" ||
    type === "hello" ||
    type === "ack" ||
    type === "error"
  ) {
    return data as ServerMessage;
  }
  return null;
}

export function isSnapshot(message: ServerMessage): message is StateSnapshot {
  return message.type === "state";
}
