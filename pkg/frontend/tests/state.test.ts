import { describe, expect, it } from "vitest";

import type { TelemetryFrame } from "../src/protocol.js";
import {
  applyTelemetry,
  displayModel,
  initialState,
  setBlindMode,
} from "../src/state.js";

export function frame(overrides: Partial<TelemetryFrame> = {}): TelemetryFrame {
  return {
    type: "telemetry",
    v: 1,
    frame_seq: 0,
    tick: 1200,
    trial_clock_s: 1.2,
    condition: "tactile",
    trial_active: true,
    dropped_frames: 0,
    hand: { aperture: 0.05, grip_force: 4.2, wrist: [0.0, -0.1, 0.12] },
    object: { status: "held", d: 0.11, h: 0.04, pos: [0.02, 0.0, 0.1] },
    pressure: 0.3,
    contact: { side: "palmar", x: 0.4 },
    tactor: { carrier_f: 225.0, envelope_active: true, amplitude_scale: 0.77 },
    milestones: { lifted: true, near_end_bin: false, placed: false },
    score: 1 / 3,
    grasped: true,
    intent_echo: null,
    events: [],
    ...overrides,
  };
}

describe("blind mode", () => {
  it("hides object and hand pose but keeps feedback live", () => {
    let state = initialState(true);
    state = applyTelemetry(state, frame());
    const model = displayModel(state);
    expect(model.blindMode).toBe(true);
    expect(model.pose).toBeNull();
    expect(model.feedback).not.toBeNull();
    expect(model.feedback!.side).toBe("palmar");
    expect(model.feedback!.carrierF).toBe(225.0);
    expect(model.feedback!.amplitudeScale).toBe(0.77);
    expect(model.feedback!.grasped).toBe(true);
  });

  it("keeps trial state and milestones visible in blind mode", () => {
    let state = initialState(true);
    state = applyTelemetry(state, frame());
    const model = displayModel(state);
    expect(model.score).toBeCloseTo(1 / 3);
    expect(model.milestones.lifted).toBe(true);
    expect(model.trialClockS).toBe(1.2);
  });

  it("practice mode shows the pose readout", () => {
    let state = initialState(true);
    state = applyTelemetry(state, frame());
    state = setBlindMode(state, false);
    const model = displayModel(state);
    expect(model.pose).not.toBeNull();
    expect(model.pose!.objectStatus).toBe("held");
    expect(model.pose!.objectD).toBe(0.11);
    expect(model.pose!.aperture).toBe(0.05);
  });

  it("toggling back to blind hides pose again without losing feedback", () => {
    let state = initialState(false);
    state = applyTelemetry(state, frame());
    state = setBlindMode(state, true);
    const model = displayModel(state);
    expect(model.pose).toBeNull();
    expect(model.feedback).not.toBeNull();
  });
});

describe("telemetry application", () => {
  it("is stateless with respect to physics: display derives from the last frame", () => {
    let state = initialState(true);
    state = applyTelemetry(state, frame({ trial_clock_s: 0.5, score: 0 }));
    state = applyTelemetry(state, frame({ trial_clock_s: 5.0, score: 1.0 }));
    const model = displayModel(state);
    expect(model.trialClockS).toBe(5.0);
    expect(model.score).toBe(1.0);

    // a fresh state fed only the latest frame renders the same display
    let reconnected = initialState(true);
    reconnected = applyTelemetry(reconnected, frame({ trial_clock_s: 5.0, score: 1.0 }));
    expect(displayModel(reconnected)).toEqual(model);
  });

  it("computes round-trip latency from the intent echo", () => {
    let state = initialState(true);
    state = applyTelemetry(
      state,
      frame({ intent_echo: { seq: 3, client_ts: 100.0, rx_tick: 10, applied_tick: 10 } }),
      140.0
    );
    expect(state.roundTripMs).toBe(40.0);
  });
});
