"""One simulated session: the 1 kHz pipeline tying all modules together.

Tick order: sample EMG, condition and normalize it, read the tactile
sensors against the plant state left by the previous tick, run the
controller, render feedback, then advance the plant with the commanded
voltage. Events (contacts, grasps, slips, milestones, object loss) are
emitted as dicts with tick stamps; traces are written into preallocated
arrays so batch trials stay fast.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Optional, Sequence, Tuple

import numpy as np

from . import control as ctrl
from .config import SessionConfig
from .emg import (
    EnvelopeFollower,
    RawEmgSample,
    load_calibration,
    make_source,
    normalize,
    rezero,
    run_calibration_procedure,
)
from .feedback import ZERO_DRIVE, VibrotactileRenderer
from .plant import ContactGeometry, HandState, ObjectStatus, Plant, SceneSpec
from .scenario import CompiledScenario, Perturbation, Scenario
from .tactile import ContactSide, TactileStack

import dataclasses

TICK_RATE_HZ = 1000
REZERO_WINDOW_TICKS = 500

TRACE_FLOAT_COLUMNS = (
    "u_c", "u_o", "voltage", "aperture", "p", "x",
    "tactor_current", "carrier_f", "D", "H",
)
TRACE_INT_COLUMNS = ("side", "status")


class NumericFault(RuntimeError):
    """A non-finite value appeared in the pipeline state."""


class TraceRecorder:
    def __init__(self, capacity: int) -> None:
        self.capacity = capacity
        self.n = 0
        self.cols = {name: np.zeros(capacity) for name in TRACE_FLOAT_COLUMNS}
        self.cols["side"] = np.zeros(capacity, dtype=np.int8)
        self.cols["status"] = np.zeros(capacity, dtype=np.int8)

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: col[: self.n] for name, col in self.cols.items()}


class SimSession:
    """Owns all per-trial state. Construct one per trial with one seed."""

    def __init__(
        self,
        config: SessionConfig,
        scenario: Optional[Scenario] = None,
        seed: int = 0,
        record_traces: bool = True,
        trace_capacity: Optional[int] = None,
    ) -> None:
        self.config = config
        self.seed = seed
        self.condition = config.condition
        self.gains = dataclasses.replace(
            config.gains, reflexes_enabled=config.reflexes_enabled
        )
        self.feedback_enabled = config.feedback_enabled

        scene = SceneSpec(**{**dataclasses.asdict(config.scene)})
        plant_params = config.plant
        emg_spec = dataclasses.replace(config.emg, seed=seed)
        hand = None
        self.compiled: Optional[CompiledScenario] = None
        if scenario is not None:
            self.compiled = scenario.compile()
            from .config import _apply_overrides  # shared coercion helper

            scene = _apply_overrides(scene, scenario.scene_overrides, "scenario.scene")
            plant_params = _apply_overrides(
                plant_params, scenario.plant_overrides, "scenario.plant"
            )
            emg_spec = _apply_overrides(emg_spec, scenario.emg_overrides, "scenario.emg")
            emg_spec = dataclasses.replace(emg_spec, seed=seed)
            sx, sy, sz = self.compiled.start_wrist
            hand = HandState(
                aperture=plant_params.aperture_max, wrist_x=sx, wrist_y=sy, wrist_z=sz
            )

        self.emg_spec = emg_spec
        self.source = make_source(emg_spec)
        if config.calibration_file:
            self.calibration = load_calibration(config.calibration_file)
        else:
            self.calibration = run_calibration_procedure(emg_spec)
        self.follower = EnvelopeFollower()
        self.plant = Plant(scene, plant_params, hand=hand)
        self.tactile = TactileStack(
            config.pressure_model,
            grasp_threshold=self.gains.grasp_pressure_threshold,
            noise_sigma=config.sensor_noise_sigma,
            seed=seed,
        )
        self.renderer = VibrotactileRenderer()
        self.reflex = ctrl.ReflexState()

        self.tick_index = 0
        self.events: list[dict] = []
        self.last_geometry = ContactGeometry(False, ContactSide.NONE, 0.0, 0.0)
        self.last_frame = None
        self.last_command = ctrl.MotorCommand(0.0, 0.0, 0.0, ctrl.MotorSource.VOLITIONAL)
        self.last_drive = ZERO_DRIVE
        self.last_pair = None

        self.lifted = False
        self.near_end = False
        self.placed = False
        self.completed = False

        self._prev_side = ContactSide.NONE
        self._prev_grasped = False
        self._prev_fast = False
        self._prev_slow = False
        self._was_gripped = False

        self._rezero_ring: deque[RawEmgSample] = deque(maxlen=REZERO_WINDOW_TICKS)

        if record_traces:
            capacity = trace_capacity
            if capacity is None:
                capacity = self.compiled.n_ticks if self.compiled else 60 * TICK_RATE_HZ
            self.trace: Optional[TraceRecorder] = TraceRecorder(capacity)
        else:
            self.trace = None

        self.emit(0, "trial_start", condition=self.condition, seed=seed)

    # -- events ---------------------------------------------------------------

    def emit(self, tick: int, event: str, **fields) -> None:
        entry = {"tick": tick, "event": event}
        entry.update(fields)
        self.events.append(entry)

    def request_rezero(self) -> bool:
        """Re-zero the channel offsets from the last 0.5 s of raw samples."""
        if len(self._rezero_ring) < REZERO_WINDOW_TICKS:
            self.emit(self.tick_index, "rezero_rejected", reason="window too short")
            return False
        self.calibration = rezero(self.calibration, list(self._rezero_ring))
        self.emit(
            self.tick_index, "rezero",
            flexor_offset=self.calibration.flexor_offset,
            extensor_offset=self.calibration.extensor_offset,
        )
        return True

    # -- main tick --------------------------------------------------------------

    def step(
        self,
        intent: Tuple[float, float],
        arm_vel: Tuple[float, float, float],
        perturbations: Sequence[Perturbation] = (),
    ) -> None:
        t = self.tick_index
        plant = self.plant

        for p in perturbations:
            duration = None if p.duration_s is None else int(round(p.duration_s * 1000))
            plant.apply_perturbation(p.kind, p.magnitude, duration)
            self.emit(t, "perturbation", kind=p.kind, magnitude=p.magnitude,
                      duration_s=p.duration_s)

        raw = self.source.sample(t, intent)
        self._rezero_ring.append(raw)
        pair = normalize(self.follower.process(raw, self.calibration), self.calibration)

        geom = self.last_geometry
        frame = self.tactile.update(
            t, geom.grip_force, geom.side, geom.fraction, geom.touching
        )
        out = ctrl.tick(pair, frame, self.reflex, self.gains, t)
        if self.feedback_enabled:
            drive = self.renderer.render(frame.contact, frame.grasped, t)
        else:
            drive = ZERO_DRIVE

        new_geom = plant.step(out.command.voltage, arm_vel)

        self._emit_transition_events(t, frame, out)
        self._update_milestones(t)

        obj = plant.obj
        if not (
            math.isfinite(frame.pressure.p)
            and math.isfinite(plant.hand.aperture)
            and math.isfinite(obj.x) and math.isfinite(obj.y) and math.isfinite(obj.z)
            and math.isfinite(out.command.voltage)
        ):
            raise NumericFault(f"non-finite state at tick {t}")

        if self.trace is not None and self.trace.n < self.trace.capacity:
            self._record_trace_row(frame, out, drive)

        self.last_geometry = new_geom
        self.last_frame = frame
        self.last_command = out.command
        self.last_drive = drive
        self.last_pair = pair
        self.tick_index = t + 1

    def _emit_transition_events(self, t: int, frame, out) -> None:
        side = frame.contact.side
        if side != self._prev_side:
            if self._prev_side != ContactSide.NONE:
                self.emit(t, "contact_end")
            if side != ContactSide.NONE:
                self.emit(t, "contact_start", side=side.name.lower(), x=frame.contact.x)
        self._prev_side = side

        if frame.grasped != self._prev_grasped:
            self.emit(t, "grasp_start" if frame.grasped else "grasp_end")
        self._prev_grasped = frame.grasped

        if out.fast_slip and not self._prev_fast:
            self.emit(t, "fast_slip")
            if self.gains.reflexes_enabled:
                self.emit(t, "pulse_start", kind="fast")
        if out.slow_slip and not self._prev_slow:
            self.emit(t, "slow_slip")
            if self.gains.reflexes_enabled and self.reflex.last_slow_slip_tick == t:
                self.emit(t, "pulse_start", kind="slow")
        self._prev_fast = out.fast_slip
        self._prev_slow = out.slow_slip

        plant = self.plant
        if self._was_gripped and not plant.gripped:
            reason = plant.last_release_reason
            if reason == "opened":
                self.emit(t, "released", deliberate=out.command.open_drive > 0.0)
            elif reason == "escape":
                self.emit(t, "object_lost", kind="slip_escape")
            elif reason == "eject":
                self.emit(t, "object_lost", kind="ejected")
        self._was_gripped = plant.gripped

    def _update_milestones(self, t: int) -> None:
        plant = self.plant
        obj = plant.obj
        scene = plant.scene
        half_len = scene.object_length / 2.0

        if (
            not self.lifted
            and plant.gripped
            and obj.z - half_len > scene.start_bin_size[2]
        ):
            self.lifted = True
            self.emit(t, "lifted")

        if self.lifted and not self.near_end:
            ex, ey = scene.end_bin_center
            if math.hypot(obj.x - ex, obj.y - ey) <= scene.vicinity_radius:
                self.near_end = True
                self.emit(t, "near_end_bin")

        if (
            not self.placed
            and obj.status == ObjectStatus.IN_END_BIN
            and not plant.gripped
        ):
            # milestones are prefix-closed
            if not self.lifted:
                self.lifted = True
                self.emit(t, "lifted")
            if not self.near_end:
                self.near_end = True
                self.emit(t, "near_end_bin")
            self.placed = True
            self.completed = True
            self.emit(t, "placed")

    def _record_trace_row(self, frame, out, drive) -> None:
        tr = self.trace
        i = tr.n
        cols = tr.cols
        cmd = out.command
        obj = self.plant.obj
        scene = self.plant.scene
        cols["u_c"][i] = cmd.close_drive
        cols["u_o"][i] = cmd.open_drive
        cols["voltage"][i] = cmd.voltage
        cols["aperture"][i] = self.plant.hand.aperture
        cols["p"][i] = frame.pressure.p
        cols["x"][i] = frame.contact.x
        cols["side"][i] = int(frame.contact.side)
        cols["tactor_current"][i] = drive.current
        cols["carrier_f"][i] = drive.carrier_f
        ex, ey = scene.end_bin_center
        cols["D"][i] = math.hypot(obj.x - ex, obj.y - ey)
        cols["H"][i] = obj.z - scene.object_length / 2.0
        cols["status"][i] = int(obj.status)
        tr.n = i + 1

    # -- telemetry ---------------------------------------------------------------

    def current_score(self) -> float:
        if self.placed:
            return 1.0
        if self.near_end:
            return 2.0 / 3.0
        if self.lifted:
            return 1.0 / 3.0
        return 0.0

    def snapshot(self) -> dict:
        plant = self.plant
        obj = plant.obj
        scene = plant.scene
        ex, ey = scene.end_bin_center
        frame = self.last_frame
        drive = self.last_drive
        return {
            "tick": self.tick_index,
            "trial_clock_s": self.tick_index / TICK_RATE_HZ,
            "condition": self.condition,
            "hand": {
                "aperture": plant.hand.aperture,
                "grip_force": plant.hand.grip_force,
                "wrist": [plant.hand.wrist_x, plant.hand.wrist_y, plant.hand.wrist_z],
            },
            "object": {
                "status": obj.status.name.lower(),
                "d": math.hypot(obj.x - ex, obj.y - ey),
                "h": obj.z - scene.object_length / 2.0,
                "pos": [obj.x, obj.y, obj.z],
            },
            "pressure": frame.pressure.p if frame else 0.0,
            "contact": {
                "side": frame.contact.side.name.lower() if frame else "none",
                "x": frame.contact.x if frame else 0.0,
            },
            "tactor": {
                "carrier_f": drive.carrier_f,
                "envelope_active": drive.envelope_active,
                "amplitude_scale": drive.amplitude_scale,
            },
            "milestones": {
                "lifted": self.lifted,
                "near_end_bin": self.near_end,
                "placed": self.placed,
            },
            "score": self.current_score(),
            "grasped": bool(frame.grasped) if frame else False,
        }
