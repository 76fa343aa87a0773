// Wire protocol shared with the session service: one JSON document per
// WebSocket message, versioned with a "v" field.

export const PROTOCOL_VERSION = 1;

export type ContactSideName = "none" | "palmar" | "dorsal";

export interface IntentMessage {
  type: "intent";
  v: number;
  seq: number;
  client_ts: number;
  flexion: number;
  extension: number;
  arm_vel: [number, number, number];
  rezero: boolean;
}

export interface IntentEcho {
  seq: number | null;
  client_ts: number | null;
  rx_tick: number;
  applied_tick: number;
}

export interface TelemetryFrame {
  type: "telemetry";
  v: number;
  frame_seq: number;
  tick: number;
  trial_clock_s: number;
  condition: string;
  trial_active: boolean;
  dropped_frames: number;
  hand: { aperture: number; grip_force: number; wrist: number[] };
  object: { status: string; d: number; h: number; pos: number[] };
  pressure: number;
  contact: { side: ContactSideName; x: number };
  tactor: { carrier_f: number; envelope_active: boolean; amplitude_scale: number };
  milestones: { lifted: boolean; near_end_bin: boolean; placed: boolean };
  score: number;
  grasped: boolean;
  intent_echo: IntentEcho | null;
  events: Array<{ tick: number; event: string; [key: string]: unknown }>;
}

export interface AckMessage {
  type: "ack";
  v: number;
  verb: string;
}

export interface ErrorMessage {
  type: "error";
  v: number;
  message: string;
}

export type ServerMessage = TelemetryFrame | AckMessage | ErrorMessage;

export type ClientVerb =
  | { type: "start_trial"; v: number; seed?: number }
  | { type: "abort"; v: number }
  | { type: "set_condition"; v: number; condition: "standard" | "tactile" }
  | { type: "recalibrate"; v: number };

export function parseServerMessage(text: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as { type?: unknown };
  if (msg.type === "telemetry" || msg.type === "ack" || msg.type === "error") {
    return data as ServerMessage;
  }
  return null;
}

export function makeIntent(fields: {
  seq: number;
  flexion: number;
  extension: number;
  armVel: [number, number, number];
  rezero: boolean;
  clientTs: number;
}): IntentMessage {
  return {
    type: "intent",
    v: PROTOCOL_VERSION,
    seq: fields.seq,
    client_ts: fields.clientTs,
    flexion: fields.flexion,
    extension: fields.extension,
    arm_vel: fields.armVel,
    rezero: fields.rezero,
  };
}
