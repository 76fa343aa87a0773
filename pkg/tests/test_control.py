import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reflexhand.control import (
    ControlGains,
    MotorCommand,
    MotorSource,
    ReflexState,
    arbitrate,
    detect_fast_slip,
    detect_slow_slip,
    overgrasp_modulate,
    tick,
    volitional,
)
from reflexhand.emg import NormalizedEmgPair
from reflexhand.tactile import ContactReading, ContactSide, PressureReading, TactileFrame

GAINS = ControlGains()


def frame(
    t=0, p=0.0, dp=0.0, dp_ready=True, delta=0.0, delta_ready=True,
    side=ContactSide.NONE, x=0.0, grasped=False,
):
    return TactileFrame(
        tick=t,
        pressure=PressureReading(p=p, dp_dt=dp, tick=t),
        derivative_ready=dp_ready,
        slow_slip_delta=delta,
        slow_slip_ready=delta_ready,
        contact=ContactReading(side=side, x=x),
        grasped=grasped,
    )


class TestVolitional:
    def test_flexion_wins(self):
        cmd = volitional(NormalizedEmgPair(0.8, 0.3), GAINS)
        assert cmd.close_drive == 0.8 and cmd.open_drive == 0.0
        assert cmd.voltage == pytest.approx(0.8 * GAINS.motor_v_max)

    def test_tie_stalls(self):
        cmd = volitional(NormalizedEmgPair(0.5, 0.5), GAINS)
        assert cmd.close_drive == 0.0 and cmd.open_drive == 0.0
        assert cmd.voltage == 0.0

    def test_extension_wins(self):
        cmd = volitional(NormalizedEmgPair(0.2, 0.9), GAINS)
        assert cmd.open_drive == 0.9 and cmd.close_drive == 0.0
        assert cmd.voltage == pytest.approx(-0.9 * GAINS.motor_v_max)

    @given(st.floats(0, 1, allow_nan=False), st.floats(0, 1, allow_nan=False))
    def test_mutual_exclusion(self, f, x):
        cmd = volitional(NormalizedEmgPair(f, x), GAINS)
        assert cmd.close_drive * cmd.open_drive == 0.0
        if f - x > 0:
            assert cmd.close_drive == f
        elif x - f > 0:
            assert cmd.open_drive == x
        else:
            assert cmd.close_drive == 0.0 and cmd.open_drive == 0.0


class TestOvergraspModulate:
    def test_below_threshold_unchanged(self):
        cmd = volitional(NormalizedEmgPair(1.0, 0.0), GAINS)
        out = overgrasp_modulate(
            cmd, PressureReading(0.1, 0.0, 0), ContactReading(ContactSide.PALMAR, 0.5), GAINS
        )
        assert out is cmd

    def test_non_palmar_unchanged(self):
        cmd = volitional(NormalizedEmgPair(1.0, 0.0), GAINS)
        out = overgrasp_modulate(
            cmd, PressureReading(0.5, 0.0, 0), ContactReading(ContactSide.DORSAL, 0.5), GAINS
        )
        assert out is cmd

    def test_exponential_attenuation_against_oracle(self):
        cmd = volitional(NormalizedEmgPair(1.0, 0.0), GAINS)
        out = overgrasp_modulate(
            cmd, PressureReading(0.5, 0.0, 0), ContactReading(ContactSide.PALMAR, 0.5), GAINS
        )
        expected = float(mpmath.exp(-GAINS.overgrasp_gain * mpmath.mpf(0.5)))
        assert out.close_drive == pytest.approx(expected, abs=1e-12)
        assert out.close_drive == pytest.approx(math.exp(-1.0), abs=1e-12)
        assert out.source == MotorSource.OVERGRASP_MODULATED

    def test_zero_gain_is_identity_factor(self):
        gains = ControlGains(overgrasp_gain=0.0)
        cmd = volitional(NormalizedEmgPair(0.7, 0.0), gains)
        out = overgrasp_modulate(
            cmd, PressureReading(0.5, 0.0, 0), ContactReading(ContactSide.PALMAR, 0.5), gains
        )
        assert out.close_drive == pytest.approx(0.7)

    @given(
        st.floats(0, 1, allow_nan=False),
        st.floats(0.15, 1, allow_nan=False),
        st.floats(0, 10, allow_nan=False),
    )
    def test_never_increases_close_drive(self, u, p, k):
        gains = ControlGains(overgrasp_gain=k)
        cmd = volitional(NormalizedEmgPair(u, 0.0), gains)
        out = overgrasp_modulate(
            cmd, PressureReading(p, 0.0, 0), ContactReading(ContactSide.PALMAR, 0.3), gains
        )
        assert out.close_drive <= cmd.close_drive
        factor = math.exp(-k * p)
        assert 0.0 < factor <= 1.0


class TestSlipDetectors:
    def test_fast_slip_inclusive_threshold(self):
        assert detect_fast_slip(-3.0, GAINS)
        assert not detect_fast_slip(0.0, GAINS)
        assert detect_fast_slip(GAINS.fast_slip_threshold, GAINS)

    def test_slow_slip_strict_threshold(self):
        assert detect_slow_slip(-0.08, GAINS)
        assert not detect_slow_slip(GAINS.slow_slip_threshold, GAINS)
        assert not detect_slow_slip(0.1, GAINS)


def run_pulse_sequence(fast_ticks, slow_ticks, n=200, gains=GAINS, open_drive=None):
    """Drive arbitrate for n ticks; returns per-tick (voltage, source)."""
    state = ReflexState()
    out = []
    for t in range(n):
        u_o = open_drive(t) if open_drive else 0.0
        cmd = MotorCommand(0.0, u_o, -u_o * gains.motor_v_max, MotorSource.VOLITIONAL)
        got, state = arbitrate(cmd, state, t in fast_ticks, t in slow_ticks, gains, t)
        out.append((got.voltage, got.source))
    return out


class TestArbitrate:
    def test_fast_pulse_is_exactly_60_ticks(self):
        out = run_pulse_sequence({10}, set())
        for t in range(10, 70):
            assert out[t] == (GAINS.motor_v_max, MotorSource.FAST_REFLEX)
        assert out[70][1] == MotorSource.VOLITIONAL
        assert out[9][1] == MotorSource.VOLITIONAL

    def test_slow_pulse_is_exactly_30_ticks(self):
        out = run_pulse_sequence(set(), {10})
        for t in range(10, 40):
            assert out[t] == (GAINS.motor_v_max, MotorSource.SLOW_REFLEX)
        assert out[40][1] == MotorSource.VOLITIONAL

    def test_slow_during_fast_pulse_suppressed(self):
        out = run_pulse_sequence({10}, {30})
        for t in range(10, 70):
            assert out[t][1] == MotorSource.FAST_REFLEX
        assert out[70][1] == MotorSource.VOLITIONAL

    def test_fast_retrigger_restarts_counter(self):
        out = run_pulse_sequence({10, 25}, set())
        for t in range(10, 85):
            assert out[t][1] == MotorSource.FAST_REFLEX
        assert out[85][1] == MotorSource.VOLITIONAL

    def test_reflexes_disabled_pass_through(self):
        gains = ControlGains(reflexes_enabled=False)
        out = run_pulse_sequence({10}, {30}, gains=gains)
        assert all(src == MotorSource.VOLITIONAL for _, src in out)

    def test_strong_opening_cancels_pulse(self):
        out = run_pulse_sequence({10}, set(), open_drive=lambda t: 0.9 if t >= 20 else 0.0)
        assert out[19][1] == MotorSource.FAST_REFLEX
        assert out[20][1] == MotorSource.VOLITIONAL
        assert out[20][0] == pytest.approx(-0.9 * GAINS.motor_v_max)


class TestTick:
    def test_quiescent_zero_voltage(self):
        out = tick(NormalizedEmgPair(0.0, 0.0), frame(), ReflexState(), GAINS, 0)
        assert out.command.voltage == 0.0

    def test_same_tick_reflex_latency(self):
        # a derivative at the threshold in tick k's frame must produce the
        # maximum closing voltage in tick k's own output
        out = tick(
            NormalizedEmgPair(0.0, 0.0),
            frame(t=5, p=0.3, dp=-2.5),
            ReflexState(),
            GAINS,
            5,
        )
        assert out.fast_slip
        assert out.command.voltage == GAINS.motor_v_max
        assert out.command.source == MotorSource.FAST_REFLEX

    def test_warmup_gates_detection(self):
        out = tick(
            NormalizedEmgPair(0.0, 0.0),
            frame(t=5, p=0.3, dp=-2.5, dp_ready=False),
            ReflexState(),
            GAINS,
            5,
        )
        assert not out.fast_slip
        assert out.command.voltage == 0.0

    def test_detectors_still_run_with_reflexes_off(self):
        gains = ControlGains(reflexes_enabled=False)
        out = tick(
            NormalizedEmgPair(0.0, 0.0),
            frame(t=5, dp=-2.5, delta=-0.08),
            ReflexState(),
            gains,
            5,
        )
        assert out.fast_slip and out.slow_slip
        assert out.command.voltage == 0.0

    def test_standard_condition_equals_pure_volitional(self):
        # with reflexes disabled, the tick output must match volitional alone
        # for an arbitrary input sequence
        gains = ControlGains(reflexes_enabled=False)
        rng = np.random.default_rng(1)
        state = ReflexState()
        for t in range(500):
            pair = NormalizedEmgPair(rng.uniform(), rng.uniform())
            fr = frame(
                t=t,
                p=rng.uniform(),
                dp=rng.uniform(-5, 5),
                delta=rng.uniform(-0.2, 0.2),
                side=ContactSide.PALMAR,
                x=rng.uniform(),
            )
            out = tick(pair, fr, state, gains, t)
            ref = volitional(pair, gains)
            assert out.command.voltage == ref.voltage
            assert out.command.close_drive == ref.close_drive
            assert out.command.open_drive == ref.open_drive

    def test_identical_inputs_identical_outputs(self):
        rng = np.random.default_rng(2)
        inputs = [
            (
                NormalizedEmgPair(rng.uniform(), rng.uniform()),
                frame(t=t, p=rng.uniform(), dp=rng.uniform(-5, 1), side=ContactSide.PALMAR),
            )
            for t in range(300)
        ]

        def run():
            state = ReflexState()
            return [
                tick(pair, fr, state, GAINS, t).command.voltage
                for t, (pair, fr) in enumerate(inputs)
            ]

        assert run() == run()

    def test_pipeline_applies_modulation_before_arbitration(self):
        out = tick(
            NormalizedEmgPair(1.0, 0.0),
            frame(t=0, p=0.5, side=ContactSide.PALMAR, x=0.5),
            ReflexState(),
            GAINS,
            0,
        )
        assert out.command.close_drive == pytest.approx(math.exp(-1.0))
        assert out.command.source == MotorSource.OVERGRASP_MODULATED
