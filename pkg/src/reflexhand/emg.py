"""Surrogate sEMG acquisition, calibration, and normalization.

The control stack consumes a pair of normalized flexor/extensor activations
each millisecond tick. This module produces them from one of three sources
(seeded synthetic noise, a recorded trace file, or live operator intent),
runs the threshold calibration procedure, and supports re-zeroing the
channel offsets after baseline drift.

Processing chain per channel: raw voltage -> offset removal -> full-wave
rectification -> 50 ms moving average -> affine map (lower threshold to 0,
upper threshold to 1) with clamping.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import signal

TICK_RATE_HZ = 1000
ENVELOPE_WINDOW_TICKS = 50  # 50 ms moving average
REZERO_MIN_TICKS = 500  # quiescent window must cover at least 500 ms

MVC_UPPER_FRACTION = 0.5  # upper threshold = 50% of MVC rectified mean
MVC_LOWER_FLOOR_FRACTION = 0.05  # lower threshold floor = 5% of MVC mean


class CalibrationInputError(ValueError):
    """A calibration window was empty or otherwise unusable."""


class DegenerateCalibrationError(ValueError):
    """Computed thresholds collapsed (upper <= lower) for a channel."""


class RezeroWindowError(ValueError):
    """Quiescent window too short to re-zero; calibration left unchanged."""


class ReplayExhausted(RuntimeError):
    """A replay trace ran out of samples."""


@dataclass(slots=True)
class RawEmgSample:
    """One tick of raw two-channel voltage."""

    tick: int
    flexor_v: float
    extensor_v: float


@dataclass(frozen=True, slots=True)
class EmgCalibration:
    """Channel offsets and normalization thresholds, all in volts.

    Thresholds are expressed relative to the offset-removed signal.
    """

    flexor_offset: float
    extensor_offset: float
    flexor_upper: float
    flexor_lower: float
    extensor_upper: float
    extensor_lower: float

    def __post_init__(self) -> None:
        if not all(
            math.isfinite(v)
            for v in (
                self.flexor_offset,
                self.extensor_offset,
                self.flexor_upper,
                self.flexor_lower,
                self.extensor_upper,
                self.extensor_lower,
            )
        ):
            raise DegenerateCalibrationError("non-finite calibration value")
        if self.flexor_upper <= self.flexor_lower:
            raise DegenerateCalibrationError(
                f"flexor upper {self.flexor_upper} <= lower {self.flexor_lower}"
            )
        if self.extensor_upper <= self.extensor_lower:
            raise DegenerateCalibrationError(
                f"extensor upper {self.extensor_upper} <= lower {self.extensor_lower}"
            )
        if self.flexor_lower < 0 or self.extensor_lower < 0:
            raise DegenerateCalibrationError("negative lower threshold")


@dataclass(slots=True)
class NormalizedEmgPair:
    """Normalized flexor/extensor activations, each clamped to [0, 1]."""

    flexion: float
    extension: float


@dataclass(frozen=True)
class EmgSourceSpec:
    """Configuration for a surrogate sEMG source.

    mode is one of "synthetic", "replay", "live". Live mode is synthetic
    generation driven by operator intent supplied at each tick; replay mode
    reads a recorded trace CSV.
    """

    mode: str = "synthetic"
    drift_rate: float = 0.0005  # V/s linear baseline ramp
    noise_band: Tuple[float, float] = (20.0, 450.0)
    seed: int = 0
    # source shape parameters
    flexor_offset_v: float = 0.10
    extensor_offset_v: float = 0.08
    mvc_flexor_v: float = 2.0
    mvc_extensor_v: float = 1.8
    baseline_noise_v: float = 0.01  # rectified-mean amplitude at zero intent
    drift_walk_sigma: float = 1e-5  # V per sqrt(tick) random-walk component
    replay_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.mode not in ("synthetic", "replay", "live"):
            raise ValueError(f"unknown EMG source mode {self.mode!r}")
        if self.drift_rate < 0:
            raise ValueError("drift_rate must be >= 0")
        lo, hi = self.noise_band
        if not 0 < lo < hi < TICK_RATE_HZ / 2:
            raise ValueError(f"noise band {self.noise_band} outside (0, Nyquist)")


def _rectified_means(
    window: Sequence[RawEmgSample], flexor_offset: float, extensor_offset: float
) -> Tuple[float, float]:
    fl = float(np.mean([abs(s.flexor_v - flexor_offset) for s in window]))
    ex = float(np.mean([abs(s.extensor_v - extensor_offset) for s in window]))
    return fl, ex


def calibrate(
    baseline_window: Sequence[RawEmgSample],
    flexion_mvc_window: Sequence[RawEmgSample],
    extension_mvc_window: Sequence[RawEmgSample],
) -> EmgCalibration:
    """Compute offsets and thresholds from the three calibration windows.

    Offsets are the baseline means. Each channel's upper threshold is 50%
    of its rectified mean during its own maximal contraction; the lower
    threshold is the cross-talk during the antagonist contraction or 5% of
    the maximal mean, whichever is higher. All values offset-removed.
    """
    for name, win in (
        ("baseline", baseline_window),
        ("flexion MVC", flexion_mvc_window),
        ("extension MVC", extension_mvc_window),
    ):
        if len(win) < 1:
            raise CalibrationInputError(f"{name} window is empty")

    flexor_offset = float(np.mean([s.flexor_v for s in baseline_window]))
    extensor_offset = float(np.mean([s.extensor_v for s in baseline_window]))

    flexion_mean, flexion_crosstalk = _rectified_means(
        flexion_mvc_window, flexor_offset, extensor_offset
    )
    extension_crosstalk, extension_mean = _rectified_means(
        extension_mvc_window, flexor_offset, extensor_offset
    )

    flexor_upper = MVC_UPPER_FRACTION * flexion_mean
    flexor_lower = max(extension_crosstalk, MVC_LOWER_FLOOR_FRACTION * flexion_mean)
    extensor_upper = MVC_UPPER_FRACTION * extension_mean
    extensor_lower = max(flexion_crosstalk, MVC_LOWER_FLOOR_FRACTION * extension_mean)

    return EmgCalibration(
        flexor_offset=flexor_offset,
        extensor_offset=extensor_offset,
        flexor_upper=flexor_upper,
        flexor_lower=flexor_lower,
        extensor_upper=extensor_upper,
        extensor_lower=extensor_lower,
    )


def _affine_clamp(value: float, lower: float, upper: float) -> float:
    s = (value - lower) / (upper - lower)
    if s < 0.0:
        return 0.0
    if s > 1.0:
        return 1.0
    return s


def normalize(raw: RawEmgSample, cal: EmgCalibration) -> NormalizedEmgPair:
    """Map offset-removed channel values onto [0, 1] between the thresholds."""
    return NormalizedEmgPair(
        flexion=_affine_clamp(
            raw.flexor_v - cal.flexor_offset, cal.flexor_lower, cal.flexor_upper
        ),
        extension=_affine_clamp(
            raw.extensor_v - cal.extensor_offset, cal.extensor_lower, cal.extensor_upper
        ),
    )


def rezero(
    cal: EmgCalibration, quiescent_window: Sequence[RawEmgSample]
) -> EmgCalibration:
    """Replace the channel offsets with the quiescent-window means.

    Thresholds are untouched. Raises RezeroWindowError if the window covers
    less than 500 ms; callers keep the previous calibration in that case.
    """
    if len(quiescent_window) < REZERO_MIN_TICKS:
        raise RezeroWindowError(
            f"need >= {REZERO_MIN_TICKS} samples, got {len(quiescent_window)}"
        )
    return replace(
        cal,
        flexor_offset=float(np.mean([s.flexor_v for s in quiescent_window])),
        extensor_offset=float(np.mean([s.extensor_v for s in quiescent_window])),
    )


class EnvelopeFollower:
    """Full-wave rectifier plus 50 ms moving average, one instance per session.

    Produces a conditioned sample whose offset-removed value is the smoothed
    rectified envelope, so it can feed normalize() directly. The average
    warms up over the first window (growing-window mean).
    """

    def __init__(self, window_ticks: int = ENVELOPE_WINDOW_TICKS) -> None:
        self.window_ticks = window_ticks
        self._flexor: deque[float] = deque(maxlen=window_ticks)
        self._extensor: deque[float] = deque(maxlen=window_ticks)
        self._flexor_sum = 0.0
        self._extensor_sum = 0.0

    def reset(self) -> None:
        self._flexor.clear()
        self._extensor.clear()
        self._flexor_sum = 0.0
        self._extensor_sum = 0.0

    def process(self, raw: RawEmgSample, cal: EmgCalibration) -> RawEmgSample:
        rf = abs(raw.flexor_v - cal.flexor_offset)
        rx = abs(raw.extensor_v - cal.extensor_offset)
        if len(self._flexor) == self.window_ticks:
            self._flexor_sum -= self._flexor[0]
            self._extensor_sum -= self._extensor[0]
        self._flexor.append(rf)
        self._extensor.append(rx)
        self._flexor_sum += rf
        self._extensor_sum += rx
        n = len(self._flexor)
        return RawEmgSample(
            tick=raw.tick,
            flexor_v=cal.flexor_offset + self._flexor_sum / n,
            extensor_v=cal.extensor_offset + self._extensor_sum / n,
        )


def _derived_rng(seed: int, key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


class SyntheticEmgSource:
    """Band-limited noise generator whose envelope tracks operator intent.

    Per channel: raw = offset + drift(t) + amplitude(intent) * n(t), where
    n(t) is band-passed white noise scaled to unit rectified mean, drift is
    a linear ramp plus a slow random walk, and the amplitude is linear from
    the baseline noise floor at zero intent to the MVC level at full intent
    (twice the upper threshold, so full intent saturates the channel).

    Fully deterministic for a fixed spec: noise and walk traces are produced
    in vectorized chunks from a generator seeded by the spec.
    """

    CHUNK = 1 << 14

    def __init__(self, spec: EmgSourceSpec, rng_key: int = 0) -> None:
        self.spec = spec
        self._rng = _derived_rng(spec.seed, rng_key)
        nyq = TICK_RATE_HZ / 2
        lo, hi = spec.noise_band
        self._ba = signal.butter(2, [lo / nyq, hi / nyq], btype="bandpass")
        # unit-impulse response energy gives the steady-state output std for
        # unit-variance white input; E|X| = std * sqrt(2/pi)
        impulse = np.zeros(4096)
        impulse[0] = 1.0
        h = signal.lfilter(*self._ba, impulse)
        self._noise_scale = 1.0 / (math.sqrt(float(np.sum(h * h))) * math.sqrt(2 / math.pi))
        b, a = self._ba
        zi_shape = max(len(a), len(b)) - 1
        self._zi = np.zeros((2, zi_shape))
        self._noise = np.empty((2, 0))
        self._walk = np.empty((2, 0))
        self._walk_last = np.zeros(2)
        self._generated = 0

    def _extend(self, upto: int) -> None:
        while self._generated <= upto:
            white = self._rng.standard_normal((2, self.CHUNK))
            block = np.empty_like(white)
            for ch in range(2):
                block[ch], self._zi[ch] = signal.lfilter(
                    *self._ba, white[ch], zi=self._zi[ch]
                )
            block *= self._noise_scale
            steps = self._rng.standard_normal((2, self.CHUNK)) * self.spec.drift_walk_sigma
            walk = np.cumsum(steps, axis=1) + self._walk_last[:, None]
            self._walk_last = walk[:, -1].copy()
            self._noise = np.concatenate([self._noise, block], axis=1)
            self._walk = np.concatenate([self._walk, walk], axis=1)
            self._generated += self.CHUNK

    def sample(
        self, tick: int, intent: Optional[Tuple[float, float]] = None
    ) -> RawEmgSample:
        """Raw sample at the given tick for the given (flexion, extension) intent."""
        self._extend(tick)
        s = self.spec
        fi, xi = (0.0, 0.0) if intent is None else intent
        fi = min(max(fi, 0.0), 1.0)
        xi = min(max(xi, 0.0), 1.0)
        ramp = s.drift_rate * (tick / TICK_RATE_HZ)
        amp_f = s.baseline_noise_v + fi * (s.mvc_flexor_v - s.baseline_noise_v)
        amp_x = s.baseline_noise_v + xi * (s.mvc_extensor_v - s.baseline_noise_v)
        return RawEmgSample(
            tick=tick,
            flexor_v=s.flexor_offset_v
            + ramp
            + float(self._walk[0, tick])
            + amp_f * float(self._noise[0, tick]),
            extensor_v=s.extensor_offset_v
            + ramp
            + float(self._walk[1, tick])
            + amp_x * float(self._noise[1, tick]),
        )


class ReplayEmgSource:
    """Plays back a recorded two-channel trace, one row per tick."""

    def __init__(self, path: str | Path) -> None:
        ticks, flex, ext = read_trace(path)
        self._flex = flex
        self._ext = ext
        self._base_tick = int(ticks[0]) if len(ticks) else 0
        self._n = len(flex)

    def sample(
        self, tick: int, intent: Optional[Tuple[float, float]] = None
    ) -> RawEmgSample:
        idx = tick
        if idx >= self._n:
            raise ReplayExhausted(f"trace has {self._n} samples, tick {tick} requested")
        return RawEmgSample(
            tick=tick, flexor_v=float(self._flex[idx]), extensor_v=float(self._ext[idx])
        )


def make_source(spec: EmgSourceSpec):
    if spec.mode == "replay":
        if not spec.replay_path:
            raise ValueError("replay mode requires replay_path")
        return ReplayEmgSource(spec.replay_path)
    return SyntheticEmgSource(spec)


def run_calibration_procedure(
    spec: EmgSourceSpec, window_ticks: int = 5000
) -> EmgCalibration:
    """Run the rest / flexion-MVC / extension-MVC protocol on a fresh source.

    Uses a source seeded independently of the session source so trial noise
    streams are unaffected. Each window is 5 s by default.
    """
    cal_spec = replace(spec, mode="synthetic", seed=spec.seed)
    src = SyntheticEmgSource(cal_spec, rng_key=1)  # separate stream from the session
    windows = []
    t = 0
    for intent in ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)):
        win = [src.sample(t + i, intent) for i in range(window_ticks)]
        windows.append(win)
        t += window_ticks
    return calibrate(*windows)


# --- persistence -----------------------------------------------------------

_CAL_FIELDS = (
    "flexor_offset",
    "extensor_offset",
    "flexor_upper",
    "flexor_lower",
    "extensor_upper",
    "extensor_lower",
)


def save_calibration(cal: EmgCalibration, path: str | Path) -> None:
    """Write the six calibration values (volts) as `key = value` lines."""
    with open(path, "w") as f:
        for name in _CAL_FIELDS:
            f.write(f"{name} = {getattr(cal, name)!r}\n")


def load_calibration(path: str | Path) -> EmgCalibration:
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                key, val = (part.strip() for part in line.split("=", 1))
                values[key] = float(val)
            except ValueError as exc:
                raise CalibrationInputError(f"{path}:{lineno}: bad line {line!r}") from exc
    missing = [name for name in _CAL_FIELDS if name not in values]
    if missing:
        raise CalibrationInputError(f"{path}: missing fields {missing}")
    return EmgCalibration(**{name: values[name] for name in _CAL_FIELDS})


def write_trace(
    path: str | Path, samples: Iterable[Tuple[int, float, float]]
) -> None:
    """Write a replay trace CSV with header tick,flexor_v,extensor_v."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["tick", "flexor_v", "extensor_v"])
        for tick, flex, ext in samples:
            writer.writerow([tick, repr(float(flex)), repr(float(ext))])


def read_trace(path: str | Path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    ticks: list[int] = []
    flex: list[float] = []
    ext: list[float] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["tick", "flexor_v", "extensor_v"]:
            raise ValueError(f"{path}: expected header tick,flexor_v,extensor_v")
        for row in reader:
            if not row:
                continue
            ticks.append(int(row[0]))
            flex.append(float(row[1]))
            ext.append(float(row[2]))
    return np.asarray(ticks), np.asarray(flex), np.asarray(ext)
