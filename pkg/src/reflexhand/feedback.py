"""Vibrotactile rendering of contact location and grasp state.

Contact location drives the tactor current amplitude (proximal contact is
strong, fingertip contact fades to zero), contact side picks the waveform
(dorsal: steady vibration; palmar: pulsing under a 4.75 Hz envelope), and a
detected grasp sweeps the palmar carrier linearly from 250 Hz down to
150 Hz over two seconds, holding there until release.

The carrier is synthesized by integrating instantaneous phase so frequency
changes stay click-free; with a constant carrier this reduces to the plain
sinusoid form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .tactile import ContactReading, ContactSide

TICK_RATE_HZ = 1000
CURRENT_LIMIT_A = 0.5
CARRIER_HIGH_HZ = 250.0
CARRIER_LOW_HZ = 150.0
SWEEP_SECONDS = 2.0
PALMAR_ENVELOPE_HZ = 4.75

_TWO_PI = 2.0 * math.pi
_DT = 1.0 / TICK_RATE_HZ


class InsufficientDataError(ValueError):
    """Not enough samples for a spectral estimate."""


@dataclass(slots=True)
class TactorDrive:
    """One tick of tactor output plus the parameters that produced it."""

    current: float
    carrier_f: float
    envelope_active: bool
    amplitude_scale: float


@dataclass(frozen=True, slots=True)
class SweepState:
    grasp_onset_tick: Optional[int] = None
    active: bool = False


ZERO_DRIVE = TactorDrive(
    current=0.0, carrier_f=CARRIER_HIGH_HZ, envelope_active=False, amplitude_scale=0.0
)


def sweep_frequency(sweep: SweepState, tick: int) -> float:
    """Palmar carrier frequency at this tick given the sweep state."""
    if not sweep.active or sweep.grasp_onset_tick is None:
        return CARRIER_HIGH_HZ
    elapsed = (tick - sweep.grasp_onset_tick) / TICK_RATE_HZ
    f = CARRIER_HIGH_HZ - (CARRIER_HIGH_HZ - CARRIER_LOW_HZ) * elapsed / SWEEP_SECONDS
    return min(max(f, CARRIER_LOW_HZ), CARRIER_HIGH_HZ)


def render_tick(
    contact: ContactReading,
    grasped: bool,
    sweep: SweepState,
    tick: int,
    phase: float,
) -> Tuple[TactorDrive, SweepState, float]:
    """Compute one tactor sample and the advanced sweep/phase state.

    The returned phase belongs to the next tick; the sample is evaluated at
    the current phase so tick n corresponds to time n/1000 s.
    """
    if grasped and not sweep.active:
        sweep = SweepState(grasp_onset_tick=tick, active=True)
    elif not grasped and sweep.active:
        sweep = SweepState(grasp_onset_tick=None, active=False)

    if contact.side == ContactSide.DORSAL:
        freq = CARRIER_HIGH_HZ
    else:
        freq = sweep_frequency(sweep, tick)

    if contact.side == ContactSide.NONE:
        drive = TactorDrive(
            current=0.0, carrier_f=freq, envelope_active=False, amplitude_scale=0.0
        )
    else:
        scale = math.sqrt(max(0.0, 1.0 - contact.x))
        carrier = math.sin(phase)
        if contact.side == ContactSide.PALMAR:
            envelope = abs(math.sin(_TWO_PI * PALMAR_ENVELOPE_HZ * tick * _DT))
            current = envelope * CURRENT_LIMIT_A * scale * carrier
            drive = TactorDrive(
                current=current, carrier_f=freq, envelope_active=True,
                amplitude_scale=scale,
            )
        else:
            current = CURRENT_LIMIT_A * scale * carrier
            drive = TactorDrive(
                current=current, carrier_f=freq, envelope_active=False,
                amplitude_scale=scale,
            )

    phase += _TWO_PI * freq * _DT
    if phase > _TWO_PI * 1e6:  # keep the accumulator small over long sessions
        phase -= _TWO_PI * math.floor(phase / _TWO_PI)
    return drive, sweep, phase


class VibrotactileRenderer:
    """Session-owned renderer state: sweep tracking and carrier phase."""

    def __init__(self) -> None:
        self.sweep = SweepState()
        self.phase = 0.0

    def reset(self) -> None:
        self.sweep = SweepState()
        self.phase = 0.0

    def render(self, contact: ContactReading, grasped: bool, tick: int) -> TactorDrive:
        drive, self.sweep, self.phase = render_tick(
            contact, grasped, self.sweep, tick, self.phase
        )
        return drive


# --- spectral oracle ---------------------------------------------------------

_ENVELOPE_BAND_HZ = (2.0, 50.0)
_ENVELOPE_DC_FRACTION = 0.05  # band peak must be this fraction of the DC level
_SILENCE_LEVEL = 1e-9


def spectral_probe(
    drive_samples: Sequence[TactorDrive] | np.ndarray,
    sample_rate_hz: float = TICK_RATE_HZ,
) -> Tuple[Optional[float], Optional[float]]:
    """Estimate the dominant carrier and any slow amplitude modulation.

    Returns (carrier_hz, modulation_hz); either may be None. The carrier is
    the spectral peak of the raw current; the modulation is the dominant
    low-band line in the spectrum of the rectified current, reported only
    when it stands clearly above the rectified signal's DC level.
    """
    if len(drive_samples) and isinstance(drive_samples[0], TactorDrive):
        currents = np.array([d.current for d in drive_samples])
    else:
        currents = np.asarray(drive_samples, dtype=float)
    n = len(currents)
    if n < 2 * sample_rate_hz:
        raise InsufficientDataError(f"need >= {int(2 * sample_rate_hz)} samples, got {n}")
    if float(np.max(np.abs(currents))) < _SILENCE_LEVEL:
        return None, None

    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    window = np.hanning(n)
    spectrum = np.abs(np.fft.rfft(currents * window))
    spectrum[0] = 0.0
    carrier_hz = float(freqs[int(np.argmax(spectrum))])

    rectified = np.abs(currents)
    dc_level = float(np.mean(rectified))
    rect_spectrum = np.abs(np.fft.rfft((rectified - dc_level) * window))
    band = (freqs >= _ENVELOPE_BAND_HZ[0]) & (freqs <= _ENVELOPE_BAND_HZ[1])
    band_mags = rect_spectrum[band]
    band_freqs = freqs[band]
    peak_idx = int(np.argmax(band_mags))
    # normalize the windowed FFT magnitude back to a physical amplitude
    peak_amplitude = 2.0 * band_mags[peak_idx] / np.sum(window)
    if dc_level > 0 and peak_amplitude >= _ENVELOPE_DC_FRACTION * dc_level:
        return carrier_hz, float(band_freqs[peak_idx])
    return carrier_hz, None
