// WebAudio adapter for the tactor tone: an oscillator with a gain stage,
// amplitude-modulated by a low-frequency oscillator when the palmar
// pulsing envelope is active. Must be unlocked by a user gesture; when
// audio is unavailable the UI falls back to the visual meter alone.

import type { AudioParams } from "./feedback.js";

const RAMP_S = 0.02;

export class TactorAudio {
  private ctx: AudioContext | null = null;
  private osc: OscillatorNode | null = null;
  private gainNode: GainNode | null = null;
  private lfo: OscillatorNode | null = null;
  private lfoDepth: GainNode | null = null;
  private lfoActive = false;
  available = false;

  unlock(): boolean {
    if (this.ctx) return this.available;
    const Ctx = window.AudioContext;
    if (!Ctx) {
      this.available = false;
      return false;
    }
    this.ctx = new Ctx();
    this.osc = this.ctx.createOscillator();
    this.gainNode = this.ctx.createGain();
    this.gainNode.gain.value = 0;
    this.osc.frequency.value = 250;
    this.osc.connect(this.gainNode);
    this.gainNode.connect(this.ctx.destination);
    this.osc.start();

    this.lfo = this.ctx.createOscillator();
    this.lfoDepth = this.ctx.createGain();
    this.lfoDepth.gain.value = 0;
    this.lfo.connect(this.lfoDepth);
    this.lfoDepth.connect(this.gainNode.gain);
    this.lfo.start();

    this.available = true;
    return true;
  }

  update(params: AudioParams): void {
    if (!this.ctx || !this.osc || !this.gainNode || !this.lfo || !this.lfoDepth) return;
    const t = this.ctx.currentTime;
    this.osc.frequency.setTargetAtTime(params.freqHz, t, RAMP_S);
    if (!params.active) {
      this.gainNode.gain.setTargetAtTime(0, t, RAMP_S);
      this.lfoDepth.gain.setTargetAtTime(0, t, RAMP_S);
      this.lfoActive = false;
      return;
    }
    // master volume kept moderate; the pulse LFO swings the gain between
    // 0 and the location-scaled level
    const level = 0.3 * params.gain;
    if (params.pulseRateHz !== null) {
      this.lfo.frequency.setTargetAtTime(params.pulseRateHz, t, RAMP_S);
      this.gainNode.gain.setTargetAtTime(level / 2, t, RAMP_S);
      this.lfoDepth.gain.setTargetAtTime(level / 2, t, RAMP_S);
      this.lfoActive = true;
    } else {
      this.gainNode.gain.setTargetAtTime(level, t, RAMP_S);
      if (this.lfoActive) {
        this.lfoDepth.gain.setTargetAtTime(0, t, RAMP_S);
        this.lfoActive = false;
      }
    }
  }
}
