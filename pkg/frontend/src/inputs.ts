// Keyboard and slider state mapped to intent messages. The heartbeat in
// main.ts calls currentIntent() every SEND_INTERVAL_MS, so a zero intent
// keeps flowing when no keys are held.

export const SEND_INTERVAL_MS = 20; // 50 Hz intent stream
export const ARM_SPEED = 0.15; // m/s per held axis key; server clamps to 0.25

export interface KeyBindings {
  close: string;
  open: string;
  xNeg: string;
  xPos: string;
  yNeg: string;
  yPos: string;
  zNeg: string;
  zPos: string;
  rezero: string;
}

export const DEFAULT_BINDINGS: KeyBindings = {
  close: "KeyJ",
  open: "KeyK",
  xNeg: "ArrowLeft",
  xPos: "ArrowRight",
  yPos: "ArrowUp",
  yNeg: "ArrowDown",
  zPos: "KeyW",
  zNeg: "KeyS",
  rezero: "KeyR",
};

export interface IntentLevels {
  flexion: number;
  extension: number;
  armVel: [number, number, number];
  rezero: boolean;
}

export class IntentSource {
  private pressed = new Set<string>();
  private sliderFlexion = 0;
  private sliderExtension = 0;
  private rezeroQueued = false;

  constructor(private bindings: KeyBindings = DEFAULT_BINDINGS) {}

  keyDown(code: string): void {
    if (code === this.bindings.rezero && !this.pressed.has(code)) {
      this.rezeroQueued = true;
    }
    this.pressed.add(code);
  }

  keyUp(code: string): void {
    this.pressed.delete(code);
  }

  releaseAll(): void {
    this.pressed.clear();
  }

  setSliders(flexion: number, extension: number): void {
    this.sliderFlexion = Math.min(Math.max(flexion, 0), 1);
    this.sliderExtension = Math.min(Math.max(extension, 0), 1);
  }

  private axis(negCode: string, posCode: string): number {
    let v = 0;
    if (this.pressed.has(negCode)) v -= ARM_SPEED;
    if (this.pressed.has(posCode)) v += ARM_SPEED;
    return v;
  }

  // Keys drive the channels at full level; both keys held sends both and
  // the server's antagonist laws resolve the tie to zero motion. Sliders
  // act as a floor under the keys for proportional control.
  currentIntent(): IntentLevels {
    const b = this.bindings;
    const flexion = Math.max(this.pressed.has(b.close) ? 1.0 : 0.0, this.sliderFlexion);
    const extension = Math.max(this.pressed.has(b.open) ? 1.0 : 0.0, this.sliderExtension);
    const rezero = this.rezeroQueued;
    this.rezeroQueued = false;
    return {
      flexion,
      extension,
      armVel: [
        this.axis(b.xNeg, b.xPos),
        this.axis(b.yNeg, b.yPos),
        this.axis(b.zNeg, b.zPos),
      ],
      rezero,
    };
  }
}
