"""Live operator session service.

One WebSocket client steers the hand in real time: intent messages
(flexion/extension levels, arm velocity, re-zero requests) apply at the
next control tick, and telemetry frames stream back at the configured
decimation of the 1 kHz loop (default every 20 ticks, 50 Hz). The control
loop runs on its own thread paced by a wall clock; network handling never
blocks it. If the telemetry queue fills because a client stalls, the
oldest frames are dropped and a counter reports it.

Wire protocol: one JSON document per WebSocket message, all carrying a
schema version field "v". Client messages have "type" in {intent,
start_trial, abort, set_condition, recalibrate}; server messages have
"type" in {telemetry, ack, error}.
"""

from __future__ import annotations

import asyncio
import dataclasses
import json
import logging
import threading
import time
from collections import deque
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import SessionConfig
from .emg import run_calibration_procedure
from .session import NumericFault, SimSession, TICK_RATE_HZ
from . import trials as trials_mod

log = logging.getLogger("reflexhand.server")

PROTOCOL_VERSION = 1
ARM_SPEED_LIMIT = 0.25  # m/s, per-axis clamp on operator arm velocity
TRIAL_LIMIT_TICKS = 60 * TICK_RATE_HZ
OUTBOUND_CAPACITY = 256
MAX_TICKS_PER_PUMP = 2000


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


class LiveLoop:
    """Wall-clock-paced session runner, independent of the network layer."""

    def __init__(
        self,
        config: SessionConfig,
        seed: int = 0,
        out_dir: Optional[str | Path] = None,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        self.config = config
        self.seed = seed
        self.out_dir = Path(out_dir) if out_dir else None
        self.clock = clock

        self._lock = threading.RLock()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

        self._intents: deque[dict] = deque(maxlen=64)
        self.outbound: deque[dict] = deque()
        self.dropped_frames = 0
        self._frame_seq = 0
        self._event_cursor = 0

        self._flexion = 0.0
        self._extension = 0.0
        self._arm_vel = (0.0, 0.0, 0.0)
        self._intent_echo: Optional[dict] = None

        self.trial_active = False
        self._trial_count = 0
        self.last_record: Optional[trials_mod.TrialRecord] = None

        self.session = self._new_session(record_traces=False)
        self._t0 = self.clock()

    # -- session management -------------------------------------------------

    def _new_session(self, record_traces: bool, seed: Optional[int] = None) -> SimSession:
        return SimSession(
            self.config,
            scenario=None,
            seed=self.seed if seed is None else seed,
            record_traces=record_traces,
            trace_capacity=TRIAL_LIMIT_TICKS,
        )

    def start_trial(self, seed: Optional[int] = None) -> None:
        with self._lock:
            self._trial_count += 1
            self.session = self._new_session(record_traces=True, seed=seed)
            self.trial_active = True
            self._event_cursor = 0
            self.outbound.clear()
            self._intent_echo = None
            self._flexion = self._extension = 0.0
            self._arm_vel = (0.0, 0.0, 0.0)
            self._t0 = self.clock()

    def _finish_trial(self, completion_tick: Optional[int],
                      aborted: bool = False, reason: Optional[str] = None) -> None:
        self.trial_active = False
        record = trials_mod.build_trial_record(
            self.session,
            trial_id=f"live_{self._trial_count:03d}",
            seed=self.session.seed,
            time_limit_s=TRIAL_LIMIT_TICKS / TICK_RATE_HZ,
            completion_tick=completion_tick,
            aborted=aborted,
            abort_reason=reason,
        )
        self.last_record = record
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            stem = f"trial_{record.trial_id}"
            trials_mod.write_trial_csv(record, self.out_dir / f"{stem}.csv")
            trials_mod.write_events_jsonl(record, self.out_dir / f"{stem}.events.jsonl")
        log.info("trial %s ended: score %.2f", record.trial_id, record.score)

    def abort_trial(self, reason: str) -> None:
        with self._lock:
            if self.trial_active:
                self._finish_trial(None, aborted=True, reason=reason)

    # -- client commands ------------------------------------------------------

    def submit(self, message: dict) -> Optional[dict]:
        """Handle one client message; returns an immediate reply or None."""
        msg_type = message.get("type")
        if msg_type == "intent":
            entry = {
                "seq": message.get("seq"),
                "client_ts": message.get("client_ts"),
                "flexion": _clamp(float(message.get("flexion", 0.0)), 0.0, 1.0),
                "extension": _clamp(float(message.get("extension", 0.0)), 0.0, 1.0),
                "arm_vel": tuple(
                    _clamp(float(v), -ARM_SPEED_LIMIT, ARM_SPEED_LIMIT)
                    for v in (message.get("arm_vel") or (0.0, 0.0, 0.0))[:3]
                ),
                "rezero": bool(message.get("rezero", False)),
                "rx_tick": self.session.tick_index,
            }
            if len(entry["arm_vel"]) != 3:
                return {"type": "error", "v": PROTOCOL_VERSION,
                        "message": "arm_vel must have three components"}
            self._intents.append(entry)
            return None
        if msg_type == "start_trial":
            seed = message.get("seed")
            self.start_trial(None if seed is None else int(seed))
            return {"type": "ack", "v": PROTOCOL_VERSION, "verb": "start_trial"}
        if msg_type == "abort":
            self.abort_trial("operator abort")
            return {"type": "ack", "v": PROTOCOL_VERSION, "verb": "abort"}
        if msg_type == "set_condition":
            condition = message.get("condition")
            if condition not in ("standard", "tactile"):
                return {"type": "error", "v": PROTOCOL_VERSION,
                        "message": f"unknown condition {condition!r}"}
            with self._lock:
                if self.trial_active:
                    return {"type": "error", "v": PROTOCOL_VERSION,
                            "message": "cannot change condition mid-trial"}
                self.config = dataclasses.replace(self.config, condition=condition)
                self.session = self._new_session(record_traces=False)
                self._t0 = self.clock()
            return {"type": "ack", "v": PROTOCOL_VERSION, "verb": "set_condition"}
        if msg_type == "recalibrate":
            with self._lock:
                self.session.calibration = run_calibration_procedure(self.session.emg_spec)
                self.session.follower.reset()
            return {"type": "ack", "v": PROTOCOL_VERSION, "verb": "recalibrate"}
        return {"type": "error", "v": PROTOCOL_VERSION,
                "message": f"unknown message type {msg_type!r}"}

    # -- loop -----------------------------------------------------------------

    def _drain_intents(self) -> None:
        latest = None
        while self._intents:
            latest = self._intents.popleft()
        if latest is None:
            return
        self._flexion = latest["flexion"]
        self._extension = latest["extension"]
        self._arm_vel = latest["arm_vel"]
        if latest["rezero"]:
            self.session.request_rezero()
        self._intent_echo = {
            "seq": latest["seq"],
            "client_ts": latest["client_ts"],
            "rx_tick": latest["rx_tick"],
            "applied_tick": self.session.tick_index,
        }

    def _push_frame(self) -> None:
        session = self.session
        frame = session.snapshot()
        new_events = session.events[self._event_cursor:]
        self._event_cursor = len(session.events)
        frame.update(
            type="telemetry",
            v=PROTOCOL_VERSION,
            frame_seq=self._frame_seq,
            trial_active=self.trial_active,
            dropped_frames=self.dropped_frames,
            intent_echo=self._intent_echo,
            events=new_events,
        )
        self._frame_seq += 1
        if len(self.outbound) >= OUTBOUND_CAPACITY:
            self.outbound.popleft()
            self.dropped_frames += 1
        self.outbound.append(frame)

    def pump(self) -> int:
        """Advance the session to the wall clock; returns ticks stepped."""
        with self._lock:
            target = int((self.clock() - self._t0) * TICK_RATE_HZ)
            target = min(target, self.session.tick_index + MAX_TICKS_PER_PUMP)
            stepped = 0
            decimation = self.config.stream_decimation
            while self.session.tick_index < target:
                self._drain_intents()
                if self.session.tick_index % decimation == 0:
                    self._push_frame()
                try:
                    self.session.step(
                        (self._flexion, self._extension), self._arm_vel
                    )
                except NumericFault as exc:
                    if self.trial_active:
                        self._finish_trial(None, aborted=True, reason=str(exc))
                    self.session = self._new_session(record_traces=False)
                    self._t0 = self.clock()
                    break
                stepped += 1
                if self.trial_active:
                    if self.session.completed:
                        self._finish_trial(self.session.tick_index - 1)
                    elif self.session.tick_index >= TRIAL_LIMIT_TICKS:
                        self._finish_trial(None)
            return stepped

    def pop_frame(self) -> Optional[dict]:
        try:
            return self.outbound.popleft()
        except IndexError:
            return None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, daemon=True, name="live-loop")
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.is_set():
            self.pump()
            time.sleep(0.002)

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)


def create_app(
    config: SessionConfig,
    out_dir: Optional[str | Path] = None,
    seed: int = 0,
    clock: Callable[[], float] = time.monotonic,
    frontend_dir: Optional[str | Path] = None,
):
    """FastAPI app exposing the session WebSocket and optional UI assets."""
    loop = LiveLoop(config, seed=seed, out_dir=out_dir, clock=clock)

    @asynccontextmanager
    async def lifespan(app):
        loop.start()
        yield
        loop.stop()

    app = FastAPI(lifespan=lifespan)
    app.state.loop = loop
    connected = {"client": False}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        try:
            await _handle_ws(ws)
        except WebSocketDisconnect:
            pass
        except Exception:
            log.exception("websocket session failed")
            raise

    async def _handle_ws(ws):
        await ws.accept()
        if connected["client"]:
            await ws.send_text(json.dumps({
                "type": "error", "v": PROTOCOL_VERSION,
                "message": "session already has an operator",
            }))
            await ws.close()
            return
        connected["client"] = True
        try:
            stop = asyncio.Event()

            async def sender():
                while not stop.is_set():
                    frame = loop.pop_frame()
                    if frame is None:
                        await asyncio.sleep(0.004)
                        continue
                    await ws.send_text(json.dumps(frame, default=float))

            async def receiver():
                while True:
                    text = await ws.receive_text()
                    try:
                        message = json.loads(text)
                    except json.JSONDecodeError as exc:
                        reply = {"type": "error", "v": PROTOCOL_VERSION,
                                 "message": f"bad JSON: {exc.msg}"}
                    else:
                        reply = loop.submit(message)
                    if reply is not None:
                        await ws.send_text(json.dumps(reply, default=float))

            recv_task = asyncio.create_task(receiver())
            send_task = asyncio.create_task(sender())
            try:
                await recv_task
            except WebSocketDisconnect:
                pass
            finally:
                stop.set()
                send_task.cancel()
                recv_task.cancel()
        finally:
            connected["client"] = False
            loop.abort_trial("client disconnected")

    ui_dir = Path(frontend_dir) if frontend_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
