// Telemetry to audio-parameter mapping. The tone stands in for the arm
// tactor: frequency and amplitude come verbatim from the server, so the
// mapping fidelity (location-scaled amplitude, dorsal steady vs palmar
// pulsing, the 250 to 150 Hz grasp sweep) is server-defined.

import type { TelemetryFrame } from "./protocol.js";

// the rectified pulsing envelope repeats at twice its sine rate
export const PALMAR_PULSE_RATE_HZ = 9.5;

export interface AudioParams {
  active: boolean;
  freqHz: number;
  gain: number;
  pulseRateHz: number | null;
}

export const SILENT: AudioParams = { active: false, freqHz: 250, gain: 0, pulseRateHz: null };

export function audioParams(frame: TelemetryFrame): AudioParams {
  if (frame.contact.side === "none" || frame.tactor.amplitude_scale <= 0) {
    return { ...SILENT, freqHz: frame.tactor.carrier_f };
  }
  return {
    active: true,
    freqHz: frame.tactor.carrier_f,
    gain: frame.tactor.amplitude_scale,
    pulseRateHz: frame.tactor.envelope_active ? PALMAR_PULSE_RATE_HZ : null,
  };
}
