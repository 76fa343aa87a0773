// Operator console wiring: keyboard/slider intent at 50 Hz, telemetry
// rendering, audio feedback, and the trial lifecycle controls. Blind mode
// (default on, matching the study protocol) hides the scene and pose
// readouts; practice mode shows them for training.

import { TactorAudio } from "./audio.js";
import { audioParams, SILENT } from "./feedback.js";
import { DEFAULT_BINDINGS, IntentSource, SEND_INTERVAL_MS } from "./inputs.js";
import { makeIntent, PROTOCOL_VERSION, ServerMessage, TelemetryFrame } from "./protocol.js";
import { SessionSocket } from "./socket.js";
import {
  applyTelemetry,
  displayModel,
  initialState,
  setBlindMode,
  setConnection,
  setError,
  UiSessionState,
} from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let state: UiSessionState = initialState(true);
const intentSource = new IntentSource(DEFAULT_BINDINGS);
const audio = new TactorAudio();
let seq = 0;

const wsUrl = `ws://${location.host || "127.0.0.1:8765"}/ws`;
const socket = new SessionSocket(wsUrl, {
  onMessage: handleMessage,
  onStatus: (status) => {
    state = setConnection(state, status);
    if (status !== "open") intentSource.releaseAll();
    render();
  },
});

function handleMessage(message: ServerMessage): void {
  if (message.type === "telemetry") {
    state = applyTelemetry(state, message as TelemetryFrame, performance.now());
    render();
  } else if (message.type === "error") {
    state = setError(state, message.message);
    render();
  }
}

function sendIntent(): void {
  if (state.connection !== "open") return;
  const levels = intentSource.currentIntent();
  socket.send(
    makeIntent({
      seq: seq++,
      flexion: levels.flexion,
      extension: levels.extension,
      armVel: levels.armVel,
      rezero: levels.rezero,
      clientTs: performance.now(),
    })
  );
}

function drawScene(frame: TelemetryFrame | null, blind: boolean): void {
  const canvas = el<HTMLCanvasElement>("scene");
  const ctx2d = canvas.getContext("2d");
  if (!ctx2d) return;
  ctx2d.clearRect(0, 0, canvas.width, canvas.height);
  if (blind || !frame) {
    ctx2d.fillStyle = "#223";
    ctx2d.fillRect(0, 0, canvas.width, canvas.height);
    ctx2d.fillStyle = "#99a";
    ctx2d.font = "14px sans-serif";
    ctx2d.textAlign = "center";
    ctx2d.fillText("scene hidden: keep your gaze on the wall target", canvas.width / 2, canvas.height / 2);
    return;
  }
  // top-down view: x across, y up the canvas
  const toPx = (x: number, y: number): [number, number] => [
    canvas.width / 2 + (x - 0.0875) * 900,
    canvas.height / 2 - y * 900,
  ];
  ctx2d.fillStyle = "#111";
  ctx2d.fillRect(0, 0, canvas.width, canvas.height);
  ctx2d.strokeStyle = "#6a6";
  for (const cx of [0.0, 0.175]) {
    const [px, py] = toPx(cx, 0);
    ctx2d.strokeRect(px - 17, py - 17, 34, 34);
  }
  const [ox, oy] = toPx(frame.object.pos[0], frame.object.pos[1]);
  ctx2d.fillStyle = frame.grasped ? "#fa0" : "#ccc";
  ctx2d.beginPath();
  ctx2d.arc(ox, oy, 9, 0, 2 * Math.PI);
  ctx2d.fill();
  const [wx, wy] = toPx(frame.hand.wrist[0], frame.hand.wrist[1]);
  ctx2d.strokeStyle = "#4af";
  ctx2d.beginPath();
  ctx2d.moveTo(wx - 10, wy);
  ctx2d.lineTo(wx + 10, wy);
  ctx2d.moveTo(wx, wy - 10);
  ctx2d.lineTo(wx, wy + 10);
  ctx2d.stroke();
  ctx2d.fillStyle = "#789";
  ctx2d.font = "11px sans-serif";
  ctx2d.textAlign = "left";
  ctx2d.fillText(`wrist z ${frame.hand.wrist[2].toFixed(3)} m`, 8, 16);
  ctx2d.fillText(`object h ${frame.object.h.toFixed(3)} m`, 8, 30);
}

function render(): void {
  const model = displayModel(state);
  el("status").textContent = model.connection;
  el("status").className = `badge ${model.connection}`;
  el("condition").textContent = model.condition;
  el("clock").textContent = `${model.trialClockS.toFixed(1)} s`;
  el("trial-state").textContent = model.trialActive ? "trial running" : "idle";
  el("score").textContent = model.score.toFixed(2);
  el("m-lifted").classList.toggle("done", model.milestones.lifted);
  el("m-near").classList.toggle("done", model.milestones.near_end_bin);
  el("m-placed").classList.toggle("done", model.milestones.placed);
  el("latency").textContent =
    model.roundTripMs === null ? "-" : `${model.roundTripMs.toFixed(0)} ms`;
  el("dropped").textContent = String(model.droppedFrames);
  el("error").textContent = model.lastError ?? "";

  const fb = model.feedback;
  const params = state.lastFrame ? audioParams(state.lastFrame) : SILENT;
  audio.update(params);
  const meter = el("meter-fill");
  meter.style.width = `${(params.active ? params.gain : 0) * 100}%`;
  meter.className = params.pulseRateHz ? "fill pulsing" : "fill";
  el("fb-side").textContent = fb ? fb.side : "-";
  el("fb-x").textContent = fb && fb.side !== "none" ? fb.x.toFixed(2) : "-";
  el("fb-freq").textContent = `${params.freqHz.toFixed(0)} Hz`;
  el("fb-grasp").textContent = fb && fb.grasped ? "grasped" : "";

  const poseBox = el("pose");
  if (model.pose) {
    poseBox.classList.remove("hidden");
    el("pose-status").textContent = model.pose.objectStatus;
    el("pose-d").textContent = `${(model.pose.objectD * 100).toFixed(1)} cm`;
    el("pose-h").textContent = `${(model.pose.objectH * 100).toFixed(1)} cm`;
    el("pose-aperture").textContent = `${(model.pose.aperture * 1000).toFixed(0)} mm`;
    el("pose-force").textContent = `${model.pose.gripForce.toFixed(1)} N`;
  } else {
    poseBox.classList.add("hidden");
  }
  drawScene(state.lastFrame, model.blindMode);
  el("wall-target").classList.toggle("hidden", !model.blindMode);
}

function bindControls(): void {
  window.addEventListener("keydown", (e) => {
    if ((e.target as HTMLElement)?.tagName === "INPUT") return;
    intentSource.keyDown(e.code);
  });
  window.addEventListener("keyup", (e) => intentSource.keyUp(e.code));
  window.addEventListener("blur", () => intentSource.releaseAll());

  const flexSlider = el<HTMLInputElement>("slider-flexion");
  const extSlider = el<HTMLInputElement>("slider-extension");
  const pushSliders = () =>
    intentSource.setSliders(Number(flexSlider.value) / 100, Number(extSlider.value) / 100);
  flexSlider.addEventListener("input", pushSliders);
  extSlider.addEventListener("input", pushSliders);

  el("btn-start").addEventListener("click", () => {
    audio.unlock();
    if (!audio.available) state = setError(state, "audio unavailable: visual meter only");
    socket.send({ type: "start_trial", v: PROTOCOL_VERSION });
  });
  el("btn-abort").addEventListener("click", () =>
    socket.send({ type: "abort", v: PROTOCOL_VERSION })
  );
  el("btn-rezero").addEventListener("click", () => intentSource.keyDown("KeyR"));
  el("btn-recal").addEventListener("click", () =>
    socket.send({ type: "recalibrate", v: PROTOCOL_VERSION })
  );
  el<HTMLSelectElement>("condition-select").addEventListener("change", (e) => {
    const condition = (e.target as HTMLSelectElement).value as "standard" | "tactile";
    socket.send({ type: "set_condition", v: PROTOCOL_VERSION, condition });
  });
  el<HTMLInputElement>("blind-toggle").addEventListener("change", (e) => {
    state = setBlindMode(state, (e.target as HTMLInputElement).checked);
    render();
  });
}

bindControls();
socket.connect();
setInterval(sendIntent, SEND_INTERVAL_MS);
render();
