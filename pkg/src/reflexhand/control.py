"""Per-tick motor controller for the 1-DoF hand.

Pipeline order each tick: antagonist volitional laws, grasp-pressure
modulation of the closing command, slip detection, then reflex-pulse
arbitration. Reflex pulses drive the motor at maximum closing voltage for
a fixed number of ticks, starting in the same tick as the detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .emg import NormalizedEmgPair
from .tactile import ContactReading, ContactSide, PressureReading, TactileFrame


class MotorSource(IntEnum):
    VOLITIONAL = 0
    OVERGRASP_MODULATED = 1
    FAST_REFLEX = 2
    SLOW_REFLEX = 3


@dataclass(frozen=True)
class ControlGains:
    """Controller thresholds and pulse lengths.

    Slip thresholds are negative: fast slip triggers on a pressure slope at
    or below fast_slip_threshold (1/s); slow slip on a 0.5 s pressure drop
    strictly below slow_slip_threshold.
    """

    overgrasp_gain: float = 2.0
    grasp_pressure_threshold: float = 0.15
    fast_slip_threshold: float = -2.0
    slow_slip_threshold: float = -0.05
    fast_pulse_ticks: int = 60
    slow_pulse_ticks: int = 30
    reflexes_enabled: bool = True
    motor_v_max: float = 7.2
    release_override_level: float = 0.8

    def __post_init__(self) -> None:
        if self.fast_slip_threshold >= 0 or self.slow_slip_threshold >= 0:
            raise ValueError("slip thresholds must be negative")
        if self.overgrasp_gain < 0:
            raise ValueError("overgrasp_gain must be >= 0")
        if self.fast_pulse_ticks <= 0 or self.slow_pulse_ticks <= 0:
            raise ValueError("pulse lengths must be positive")


@dataclass(slots=True)
class MotorCommand:
    """Arbitrated motor drive. At most one of close/open drive is nonzero;
    positive voltage closes the hand."""

    close_drive: float
    open_drive: float
    voltage: float
    source: MotorSource


@dataclass(slots=True)
class ReflexState:
    fast_pulse_remaining: int = 0
    slow_pulse_remaining: int = 0
    last_fast_slip_tick: int = -1
    last_slow_slip_tick: int = -1


@dataclass(slots=True)
class ControlOutput:
    command: MotorCommand
    state: ReflexState
    fast_slip: bool
    slow_slip: bool


def volitional(pair: NormalizedEmgPair, gains: ControlGains) -> MotorCommand:
    """Antagonist proportional control: the stronger channel wins, ties stall."""
    close = pair.flexion if pair.flexion - pair.extension > 0 else 0.0
    open_ = pair.extension if pair.extension - pair.flexion > 0 else 0.0
    return MotorCommand(
        close_drive=close,
        open_drive=open_,
        voltage=(close - open_) * gains.motor_v_max,
        source=MotorSource.VOLITIONAL,
    )


def overgrasp_modulate(
    cmd: MotorCommand,
    pressure: PressureReading,
    contact: ContactReading,
    gains: ControlGains,
) -> MotorCommand:
    """Attenuate the closing command exponentially in grasp pressure.

    Applies only with palmar contact at or above the grasp pressure
    threshold; otherwise the command passes through untouched.
    """
    if pressure.p < gains.grasp_pressure_threshold or contact.side != ContactSide.PALMAR:
        return cmd
    close = cmd.close_drive * math.exp(-gains.overgrasp_gain * pressure.p)
    return MotorCommand(
        close_drive=close,
        open_drive=cmd.open_drive,
        voltage=(close - cmd.open_drive) * gains.motor_v_max,
        source=MotorSource.OVERGRASP_MODULATED,
    )


def detect_fast_slip(dp_dt: float, gains: ControlGains) -> bool:
    return dp_dt <= gains.fast_slip_threshold


def detect_slow_slip(delta: float, gains: ControlGains) -> bool:
    return delta < gains.slow_slip_threshold


def _reflex_command(source: MotorSource, gains: ControlGains) -> MotorCommand:
    return MotorCommand(
        close_drive=1.0, open_drive=0.0, voltage=gains.motor_v_max, source=source
    )


def arbitrate(
    cmd: MotorCommand,
    state: ReflexState,
    fast: bool,
    slow: bool,
    gains: ControlGains,
    tick: int,
) -> tuple[MotorCommand, ReflexState]:
    """Schedule reflex pulses and pick the tick's motor command.

    A fast-slip detection starts (or restarts) the fast pulse; a slow-slip
    detection starts the slow pulse only when no fast pulse is active.
    While any pulse runs, the output is maximum closing voltage. Strong
    volitional opening cancels the pulses so the operator can set the
    object down. Disabled reflexes make this a pass-through.
    """
    if not gains.reflexes_enabled:
        return cmd, state

    if cmd.open_drive >= gains.release_override_level:
        state.fast_pulse_remaining = 0
        state.slow_pulse_remaining = 0
        return cmd, state

    if fast:
        state.fast_pulse_remaining = gains.fast_pulse_ticks
        state.last_fast_slip_tick = tick
    elif slow and state.fast_pulse_remaining == 0:
        state.slow_pulse_remaining = gains.slow_pulse_ticks
        state.last_slow_slip_tick = tick

    if state.fast_pulse_remaining > 0:
        out = _reflex_command(MotorSource.FAST_REFLEX, gains)
    elif state.slow_pulse_remaining > 0:
        out = _reflex_command(MotorSource.SLOW_REFLEX, gains)
    else:
        out = cmd

    if state.fast_pulse_remaining > 0:
        state.fast_pulse_remaining -= 1
    if state.slow_pulse_remaining > 0:
        state.slow_pulse_remaining -= 1
    return out, state


def tick(
    pair: NormalizedEmgPair,
    frame: TactileFrame,
    state: ReflexState,
    gains: ControlGains,
    tick_index: int,
) -> ControlOutput:
    """Run the full controller for one tick.

    Slip detectors always run (their events feed trial metrics in both
    conditions); with reflexes disabled the output is exactly the
    volitional command.
    """
    vol = volitional(pair, gains)
    fast = frame.derivative_ready and detect_fast_slip(frame.pressure.dp_dt, gains)
    slow = frame.slow_slip_ready and detect_slow_slip(frame.slow_slip_delta, gains)
    if not gains.reflexes_enabled:
        return ControlOutput(command=vol, state=state, fast_slip=fast, slow_slip=slow)
    cmd = overgrasp_modulate(vol, frame.pressure, frame.contact, gains)
    cmd, state = arbitrate(cmd, state, fast, slow, gains, tick_index)
    return ControlOutput(command=cmd, state=state, fast_slip=fast, slow_slip=slow)
