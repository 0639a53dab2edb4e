/** Client state: a mirror of the latest server snapshot plus message log.
 *
 * The client never computes scores, forces or landings itself; every
 * rendered quantity comes from the server. The only client-side numbers
 * are display scales.
 */
import type {
  ServerMessage,
  ShotResult,
  StateSnapshot,
  TrialSummary,
} from "./protocol.js";

export interface ClientState {
  connected: boolean;
  participant: string | null;
  snapshot: StateSnapshot | null;
  lastResult: ShotResult | null;
  resultShownUntil: number; // epoch ms; score card stays up 3 s
  trialSummaries: TrialSummary["aggregate"][];
  lastError: string | null;
}

export function initialState(): ClientState {
  return {
    connected: false,
    participant: null,
    snapshot: null,
    lastResult: null,
    resultShownUntil: 0,
    trialSummaries: [],
    lastError: null,
  };
}

export const SCORE_CARD_MS = 3000;

export function reduce(
  state: ClientState,
  message: ServerMessage,
  nowMs: number,
): ClientState {
  switch (message.type) {
    case "hello":
      return { ...state, connected: true, participant: message.participant };
    case "state":
      return { ...state, snapshot: message };
    case "shot_result":
      return {
        ...state,
        lastResult: message,
        // the score card appears after the slide animation finishes
        resultShownUntil:
          nowMs + message.animationS * 1000 + SCORE_CARD_MS,
      };
    case "trial_summary":
      return {
        ...state,
        trialSummaries: [...state.trialSummaries, message.aggregate],
      };
    case "error":
      return { ...state, lastError: message.detail ?? message.error };
    case "ack":
      return state;
  }
}

export function setDisconnected(state: ClientState): ClientState {
  return { ...state, connected: false };
}

/** What the participant view should draw right now. */
export interface RenderModel {
  showCube: boolean;
  showSphere: boolean;
  showForceMeter: boolean;
  forceFraction: number; // 0..1 of the device limit
  cursorPosition: number | null;
  occluded: boolean;
  scoreCard: { landing: number; points: number } | null;
  slideAnimation: { landing: number; progress: number } | null;
  prompt: StateSnapshot["prompt"];
  trialScore: number;
  totalScore: number;
  paused: boolean;
  done: boolean;
}

export const DEVICE_FORCE_LIMIT_DISPLAY = 20;

export function renderModel(state: ClientState, nowMs: number): RenderModel {
  const snap = state.snapshot;
  if (snap === null) {
    return {
      showCube: false,
      showSphere: false,
      showForceMeter: false,
      forceFraction: 0,
      cursorPosition: null,
      occluded: false,
      scoreCard: null,
      slideAnimation: null,
      prompt: null,
      trialScore: 0,
      totalScore: 0,
      paused: false,
      done: false,
    };
  }
  const occluded = snap.elongationHidden;
  const inAnimation = snap.landingAnimation !== null;
  const scoreCardActive =
    state.lastResult !== null && !inAnimation && nowMs < state.resultShownUntil;
  return {
    showCube: snap.cubeVisible,
    showSphere: snap.sphereVisible,
    showForceMeter: occluded, // only the force meter moves while grabbed
    forceFraction: Math.min(
      1,
      Math.max(0, snap.renderedForce / DEVICE_FORCE_LIMIT_DISPLAY),
    ),
    cursorPosition: snap.cursorPosition,
    occluded,
    scoreCard: scoreCardActive
      ? { landing: state.lastResult!.landing, points: state.lastResult!.points }
      : null,
    slideAnimation: snap.landingAnimation
      ? {
          landing: snap.landingAnimation.landing,
          progress: 1 - Math.min(1, snap.landingAnimation.remainingS / 5),
        }
      : null,
    prompt: snap.prompt,
    trialScore: snap.trialScore,
    totalScore: snap.totalScore,
    paused: snap.paused,
    done: snap.done,
  };
}
