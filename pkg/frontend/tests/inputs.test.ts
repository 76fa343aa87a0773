import { describe, expect, it } from "vitest";

import {
  ARM_SPEED,
  DEFAULT_BINDINGS,
  IntentSource,
  SEND_INTERVAL_MS,
} from "../src/inputs.js";

describe("intent source", () => {
  it("close key at full drives flexion only", () => {
    const src = new IntentSource();
    src.keyDown(DEFAULT_BINDINGS.close);
    const intent = src.currentIntent();
    expect(intent.flexion).toBe(1.0);
    expect(intent.extension).toBe(0.0);
  });

  it("no keys yields a zero-intent heartbeat payload", () => {
    const src = new IntentSource();
    const intent = src.currentIntent();
    expect(intent.flexion).toBe(0.0);
    expect(intent.extension).toBe(0.0);
    expect(intent.armVel).toEqual([0, 0, 0]);
    expect(intent.rezero).toBe(false);
  });

  it("simultaneous open and close sends both; the server resolves the tie", () => {
    const src = new IntentSource();
    src.keyDown(DEFAULT_BINDINGS.close);
    src.keyDown(DEFAULT_BINDINGS.open);
    const intent = src.currentIntent();
    expect(intent.flexion).toBe(1.0);
    expect(intent.extension).toBe(1.0);
  });

  it("arm axes combine and cancel", () => {
    const src = new IntentSource();
    src.keyDown(DEFAULT_BINDINGS.xPos);
    src.keyDown(DEFAULT_BINDINGS.zPos);
    expect(src.currentIntent().armVel).toEqual([ARM_SPEED, 0, ARM_SPEED]);
    src.keyDown(DEFAULT_BINDINGS.xNeg);
    expect(src.currentIntent().armVel[0]).toBe(0);
  });

  it("key release stops motion", () => {
    const src = new IntentSource();
    src.keyDown(DEFAULT_BINDINGS.close);
    src.keyUp(DEFAULT_BINDINGS.close);
    expect(src.currentIntent().flexion).toBe(0.0);
  });

  it("rezero is edge triggered and consumed once", () => {
    const src = new IntentSource();
    src.keyDown(DEFAULT_BINDINGS.rezero);
    expect(src.currentIntent().rezero).toBe(true);
    expect(src.currentIntent().rezero).toBe(false);
    // holding the key does not retrigger
    src.keyDown(DEFAULT_BINDINGS.rezero);
    expect(src.currentIntent().rezero).toBe(false);
    src.keyUp(DEFAULT_BINDINGS.rezero);
    src.keyDown(DEFAULT_BINDINGS.rezero);
    expect(src.currentIntent().rezero).toBe(true);
  });

  it("sliders floor the key levels for proportional control", () => {
    const src = new IntentSource();
    src.setSliders(0.4, 0.0);
    expect(src.currentIntent().flexion).toBe(0.4);
    src.keyDown(DEFAULT_BINDINGS.close);
    expect(src.currentIntent().flexion).toBe(1.0);
  });

  it("slider values are clamped to the unit interval", () => {
    const src = new IntentSource();
    src.setSliders(7, -3);
    const intent = src.currentIntent();
    expect(intent.flexion).toBe(1.0);
    expect(intent.extension).toBe(0.0);
  });

  it("send interval meets the 50 Hz contract", () => {
    expect(SEND_INTERVAL_MS).toBeLessThanOrEqual(20);
  });
});
