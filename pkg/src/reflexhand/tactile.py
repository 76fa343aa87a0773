"""Fabric tactile sensor models: thumb pressure and finger contact location.

The thumb sensor is a piezoresistive pad in a voltage divider; grip force
lowers its resistance, raising the divider output. The finger sensor is a
voltage gradient along the finger wrap: contact position maps to a distinct
voltage, normalized 0 (proximal) to 1 (distal) and tagged palmar or dorsal.

This module turns simulated contact state into the per-tick signals the
controller and feedback renderer consume: normalized pressure p, its time
derivative, the 0.5 s pressure drop used for slow-slip detection, the
contact reading, and a debounced grasp flag.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

import numpy as np

TICK_RATE_HZ = 1000
DERIVATIVE_WINDOW_TICKS = 10  # causal two-point difference over 10 ms
SLOW_SLIP_LOOKBACK_TICKS = 500  # p(t) - p(t - 0.5 s)
GRASP_DEBOUNCE_TICKS = 20  # sustained threshold crossing, both edges


class ContactSide(IntEnum):
    NONE = 0
    PALMAR = 1
    DORSAL = 2


@dataclass(slots=True)
class PressureReading:
    """Normalized pressure signal and its derivative at one tick."""

    p: float
    dp_dt: float
    tick: int


@dataclass(slots=True)
class ContactReading:
    """Where the finger wrap is being touched, if anywhere.

    x runs 0 (proximal) to 1 (distal) and is meaningful only when side is
    not NONE.
    """

    side: ContactSide
    x: float = 0.0


@dataclass(frozen=True)
class PressureSensorModel:
    """Voltage-divider model of the thumb pressure sensor.

    Resistance decays exponentially from the unloaded value toward the
    saturated value with the configured force scale. The output is the
    divider voltage across the fixed series resistor, normalized by its
    value at full saturation so p approaches 1 under heavy load.
    """

    supply_v: float = 5.0
    series_r: float = 1000.0
    r_unloaded: float = 30000.0
    r_saturated: float = 200.0
    force_scale: float = 3.0  # N; fabric saturates at moderate grip force

    def __post_init__(self) -> None:
        if not (self.r_unloaded > self.r_saturated > 0):
            raise ValueError("need r_unloaded > r_saturated > 0")
        if self.supply_v <= 0 or self.series_r <= 0 or self.force_scale <= 0:
            raise ValueError("supply_v, series_r, force_scale must be positive")

    def resistance(self, grip_force: float) -> float:
        return self.r_saturated + (self.r_unloaded - self.r_saturated) * math.exp(
            -grip_force / self.force_scale
        )

    def divider_voltage(self, resistance: float) -> float:
        return self.supply_v * self.series_r / (self.series_r + resistance)

    @property
    def v_max(self) -> float:
        return self.divider_voltage(self.r_saturated)


def pressure_from_force(grip_force: float, model: PressureSensorModel) -> float:
    """Normalized divider output for a given grip force (contract: force >= 0)."""
    if grip_force < 0:
        raise ValueError(f"grip force must be >= 0, got {grip_force}")
    v_out = model.divider_voltage(model.resistance(grip_force))
    return v_out / model.v_max


class PressureHistory:
    """Ring of per-tick pressure samples covering the slow-slip lookback.

    Samples must be appended once per tick in order. Readers get a warm-up
    flag until enough history exists.
    """

    def __init__(self) -> None:
        self._buf: deque[float] = deque(maxlen=SLOW_SLIP_LOOKBACK_TICKS + 1)
        self.last_tick: int = -1

    def append(self, tick: int, p: float) -> None:
        if tick <= self.last_tick:
            raise ValueError(f"tick {tick} not after {self.last_tick}")
        self._buf.append(p)
        self.last_tick = tick

    def __len__(self) -> int:
        return len(self._buf)

    def derivative(self) -> Tuple[float, bool]:
        """Causal slope over the 10 ms window, in 1/s, plus a ready flag."""
        n = len(self._buf)
        if n < DERIVATIVE_WINDOW_TICKS + 1:
            return 0.0, False
        dt = DERIVATIVE_WINDOW_TICKS / TICK_RATE_HZ
        return (self._buf[-1] - self._buf[-(DERIVATIVE_WINDOW_TICKS + 1)]) / dt, True

    def slow_slip_delta(self) -> Tuple[float, bool]:
        """p(t) - p(t - 0.5 s) by exact sample lookup, plus a ready flag."""
        if len(self._buf) < SLOW_SLIP_LOOKBACK_TICKS + 1:
            return 0.0, False
        return self._buf[-1] - self._buf[0], True


# --- contact-location gradient ----------------------------------------------

# The wrap covers both finger surfaces as one gradient: proximal-palmar at
# the low end, the fingertip at the midpoint, proximal-dorsal at the high
# end. Both sides therefore share the gradient as two half-ranges that meet
# at the tip (x = 1 on either side is the same physical point).
GRADIENT_V_LOW = 0.5
GRADIENT_V_HIGH = 4.5


def encode_contact_voltage(side: ContactSide, x: float) -> float:
    """Voltage the gradient sensor produces for a contact at (side, x)."""
    if side == ContactSide.NONE:
        raise ValueError("no voltage is produced without contact")
    x = min(max(x, 0.0), 1.0)
    u = 0.5 * x if side == ContactSide.PALMAR else 1.0 - 0.5 * x
    return GRADIENT_V_LOW + u * (GRADIENT_V_HIGH - GRADIENT_V_LOW)


def decode_contact_voltage(voltage: float) -> Tuple[ContactSide, float]:
    u = (voltage - GRADIENT_V_LOW) / (GRADIENT_V_HIGH - GRADIENT_V_LOW)
    u = min(max(u, 0.0), 1.0)
    if u <= 0.5:
        return ContactSide.PALMAR, 2.0 * u
    return ContactSide.DORSAL, 2.0 * (1.0 - u)


def contact_from_geometry(
    side: ContactSide, arc_fraction: float, touching: bool
) -> ContactReading:
    """Build the contact reading for a simulated touch.

    The location is round-tripped through the voltage gradient model; the
    side tag from the contact geometry is authoritative (the two half-ranges
    meet at the fingertip, where the decoder cannot distinguish sides).
    """
    if not touching or side == ContactSide.NONE:
        return ContactReading(side=ContactSide.NONE, x=0.0)
    if not 0.0 <= arc_fraction <= 1.0:
        raise ValueError(f"arc fraction {arc_fraction} outside [0, 1]")
    voltage = encode_contact_voltage(side, arc_fraction)
    _, x = decode_contact_voltage(voltage)
    return ContactReading(side=side, x=x)


class GraspDetector:
    """Debounced threshold detector for grasp onset and release.

    The grasp flag turns on after the pressure has been at or above the
    threshold for the debounce window, and off again after it has been
    below for the same window.
    """

    def __init__(self, threshold: float, debounce_ticks: int = GRASP_DEBOUNCE_TICKS):
        self.threshold = threshold
        self.debounce_ticks = debounce_ticks
        self.grasped = False
        self._run = 0

    def reset(self) -> None:
        self.grasped = False
        self._run = 0

    def update(self, p: float) -> bool:
        above = p >= self.threshold
        if above == self.grasped:
            self._run = 0
        else:
            self._run += 1
            if self._run >= self.debounce_ticks:
                self.grasped = above
                self._run = 0
        return self.grasped


@dataclass(slots=True)
class TactileFrame:
    """Everything the sensors report for one tick."""

    tick: int
    pressure: PressureReading
    derivative_ready: bool
    slow_slip_delta: float
    slow_slip_ready: bool
    contact: ContactReading
    grasped: bool


class TactileStack:
    """Owns sensor state for a session: history, noise stream, grasp debounce.

    The additive pressure noise is Gaussian with the configured standard
    deviation but band-limited (10 Hz low-pass), matching conditioned sensor
    electronics; noise that decorrelates within the 10 ms derivative window
    would fire the fast-slip detector on a quiet signal.
    """

    CHUNK = 1 << 14
    NOISE_CUTOFF_HZ = 10.0

    def __init__(
        self,
        model: PressureSensorModel,
        grasp_threshold: float,
        noise_sigma: float = 0.005,
        seed: int = 0,
    ) -> None:
        from scipy import signal as _signal

        self.model = model
        self.noise_sigma = noise_sigma
        self.history = PressureHistory()
        self.detector = GraspDetector(grasp_threshold)
        self._rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
        self._ba = _signal.butter(2, self.NOISE_CUTOFF_HZ / (TICK_RATE_HZ / 2))
        impulse = np.zeros(4096)
        impulse[0] = 1.0
        h = _signal.lfilter(*self._ba, impulse)
        self._noise_gain = 1.0 / math.sqrt(float(np.sum(h * h)))
        self._zi = np.zeros(max(len(self._ba[0]), len(self._ba[1])) - 1)
        self._noise = np.empty(0)
        self._generated = 0

    def _noise_at(self, tick: int) -> float:
        from scipy import signal as _signal

        while self._generated <= tick:
            white = self._rng.standard_normal(self.CHUNK)
            block, self._zi = _signal.lfilter(*self._ba, white, zi=self._zi)
            block *= self._noise_gain * self.noise_sigma
            self._noise = np.concatenate([self._noise, block])
            self._generated += self.CHUNK
        return float(self._noise[tick])

    def update(
        self,
        tick: int,
        grip_force: float,
        contact_side: ContactSide,
        contact_fraction: float,
        touching: bool,
    ) -> TactileFrame:
        p = pressure_from_force(grip_force, self.model)
        if self.noise_sigma > 0.0:
            p += self._noise_at(tick)
        p = min(max(p, 0.0), 1.0)
        self.history.append(tick, p)
        dp_dt, dp_ready = self.history.derivative()
        delta, delta_ready = self.history.slow_slip_delta()
        contact = contact_from_geometry(contact_side, contact_fraction, touching)
        grasped = self.detector.update(p)
        return TactileFrame(
            tick=tick,
            pressure=PressureReading(p=p, dp_dt=dp_dt, tick=tick),
            derivative_ready=dp_ready,
            slow_slip_delta=delta,
            slow_slip_ready=delta_ready,
            contact=contact,
            grasped=grasped,
        )
