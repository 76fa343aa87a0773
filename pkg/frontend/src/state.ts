// UI session state: server-authoritative telemetry plus local view flags.
// The display model is where blind mode is enforced, so the rule is
// testable: object and hand pose are hidden, feedback channels never are.

import type { TelemetryFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface UiSessionState {
  connection: ConnectionStatus;
  blindMode: boolean;
  lastFrame: TelemetryFrame | null;
  lastError: string | null;
  roundTripMs: number | null;
}

export function initialState(blindMode = true): UiSessionState {
  return {
    connection: "connecting",
    blindMode,
    lastFrame: null,
    lastError: null,
    roundTripMs: null,
  };
}

export function setConnection(
  state: UiSessionState, connection: ConnectionStatus
): UiSessionState {
  return { ...state, connection };
}

export function setBlindMode(state: UiSessionState, blindMode: boolean): UiSessionState {
  return { ...state, blindMode };
}

export function setError(state: UiSessionState, message: string): UiSessionState {
  return { ...state, lastError: message };
}

export function applyTelemetry(
  state: UiSessionState, frame: TelemetryFrame, nowMs?: number
): UiSessionState {
  let roundTripMs = state.roundTripMs;
  if (nowMs !== undefined && frame.intent_echo && frame.intent_echo.client_ts !== null) {
    roundTripMs = nowMs - frame.intent_echo.client_ts;
  }
  return { ...state, lastFrame: frame, roundTripMs };
}

export interface FeedbackView {
  side: string;
  x: number;
  carrierF: number;
  envelopeActive: boolean;
  amplitudeScale: number;
  grasped: boolean;
}

export interface PoseView {
  objectStatus: string;
  objectD: number;
  objectH: number;
  objectPos: number[];
  aperture: number;
  gripForce: number;
  wrist: number[];
}

export interface DisplayModel {
  connection: ConnectionStatus;
  blindMode: boolean;
  trialActive: boolean;
  trialClockS: number;
  condition: string;
  score: number;
  milestones: { lifted: boolean; near_end_bin: boolean; placed: boolean };
  feedback: FeedbackView | null;
  // null in blind mode: the operator must work from feedback alone,
  // mirroring the no-direct-vision protocol
  pose: PoseView | null;
  droppedFrames: number;
  roundTripMs: number | null;
  lastError: string | null;
}

export function displayModel(state: UiSessionState): DisplayModel {
  const frame = state.lastFrame;
  const feedback: FeedbackView | null = frame
    ? {
        side: frame.contact.side,
        x: frame.contact.x,
        carrierF: frame.tactor.carrier_f,
        envelopeActive: frame.tactor.envelope_active,
        amplitudeScale: frame.tactor.amplitude_scale,
        grasped: frame.grasped,
      }
    : null;
  const pose: PoseView | null =
    frame && !state.blindMode
      ? {
          objectStatus: frame.object.status,
          objectD: frame.object.d,
          objectH: frame.object.h,
          objectPos: frame.object.pos,
          aperture: frame.hand.aperture,
          gripForce: frame.hand.grip_force,
          wrist: frame.hand.wrist,
        }
      : null;
  return {
    connection: state.connection,
    blindMode: state.blindMode,
    trialActive: frame?.trial_active ?? false,
    trialClockS: frame?.trial_clock_s ?? 0,
    condition: frame?.condition ?? "unknown",
    score: frame?.score ?? 0,
    milestones: frame?.milestones ?? { lifted: false, near_end_bin: false, placed: false },
    feedback,
    pose,
    droppedFrames: frame?.dropped_frames ?? 0,
    roundTripMs: state.roundTripMs,
    lastError: state.lastError,
  };
}
