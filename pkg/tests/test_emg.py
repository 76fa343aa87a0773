import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reflexhand import emg
from reflexhand.emg import (
    CalibrationInputError,
    DegenerateCalibrationError,
    EmgCalibration,
    EmgSourceSpec,
    EnvelopeFollower,
    RawEmgSample,
    ReplayEmgSource,
    ReplayExhausted,
    RezeroWindowError,
    SyntheticEmgSource,
    calibrate,
    load_calibration,
    normalize,
    rezero,
    run_calibration_procedure,
    save_calibration,
    write_trace,
)


def constant_window(flexor, extensor, n=100, start_tick=0):
    return [
        RawEmgSample(tick=start_tick + i, flexor_v=flexor, extensor_v=extensor)
        for i in range(n)
    ]


class TestCalibrate:
    def test_thresholds_from_known_means(self):
        # baseline flexor mean 0.10 V; flexion MVC flexor 2.0 V offset-removed;
        # flexor cross-talk during extension MVC 0.04 V
        cal = calibrate(
            constant_window(0.10, 0.05),
            constant_window(2.10, 0.07, start_tick=100),
            constant_window(0.14, 1.05, start_tick=200),
        )
        assert cal.flexor_offset == pytest.approx(0.10)
        assert cal.flexor_upper == pytest.approx(1.0)
        assert cal.flexor_lower == pytest.approx(max(0.04, 0.05 * 2.0))
        assert cal.flexor_lower == pytest.approx(0.10)

    def test_crosstalk_dominates_five_percent_floor(self):
        cal = calibrate(
            constant_window(0.10, 0.05),
            constant_window(2.10, 0.07, start_tick=100),
            constant_window(0.40, 1.05, start_tick=200),
        )
        assert cal.flexor_lower == pytest.approx(0.30)

    def test_zero_offset_case(self):
        cal = calibrate(
            constant_window(0.0, 0.0),
            constant_window(1.0, 0.0, start_tick=100),
            constant_window(0.0, 1.0, start_tick=200),
        )
        assert cal.flexor_offset == 0.0
        assert cal.flexor_upper == pytest.approx(0.5)
        assert cal.flexor_lower == pytest.approx(0.05)
        assert cal.extensor_upper == pytest.approx(0.5)
        assert cal.extensor_lower == pytest.approx(0.05)

    def test_empty_window_rejected(self):
        with pytest.raises(CalibrationInputError):
            calibrate([], constant_window(1.0, 0.0), constant_window(0.0, 1.0))

    def test_degenerate_thresholds_rejected(self):
        # cross-talk above the upper threshold collapses the range
        with pytest.raises(DegenerateCalibrationError):
            calibrate(
                constant_window(0.0, 0.0),
                constant_window(2.0, 0.0, start_tick=100),
                constant_window(1.2, 1.0, start_tick=200),
            )


def simple_cal():
    return EmgCalibration(
        flexor_offset=0.10,
        extensor_offset=0.05,
        flexor_upper=1.0,
        flexor_lower=0.10,
        extensor_upper=0.8,
        extensor_lower=0.08,
    )


class TestNormalize:
    def test_saturates_at_upper(self):
        cal = simple_cal()
        s = normalize(RawEmgSample(0, cal.flexor_offset + cal.flexor_upper, 0.05), cal)
        assert s.flexion == 1.0

    def test_floors_at_lower(self):
        cal = simple_cal()
        s = normalize(RawEmgSample(0, cal.flexor_offset + cal.flexor_lower, 0.05), cal)
        assert s.flexion == 0.0

    def test_midpoint(self):
        cal = simple_cal()
        mid = cal.flexor_offset + 0.5 * (cal.flexor_lower + cal.flexor_upper)
        s = normalize(RawEmgSample(0, mid, 0.05), cal)
        assert s.flexion == pytest.approx(0.5)

    @given(
        st.floats(-5, 5, allow_nan=False),
        st.floats(-5, 5, allow_nan=False),
    )
    def test_outputs_in_unit_square(self, fv, xv):
        s = normalize(RawEmgSample(0, fv, xv), simple_cal())
        assert 0.0 <= s.flexion <= 1.0
        assert 0.0 <= s.extension <= 1.0

    @given(
        st.floats(-5, 5, allow_nan=False),
        st.floats(0, 2, allow_nan=False),
    )
    def test_monotone_in_raw_value(self, fv, bump):
        cal = simple_cal()
        lo = normalize(RawEmgSample(0, fv, 0.0), cal)
        hi = normalize(RawEmgSample(0, fv + bump, 0.0), cal)
        assert hi.flexion >= lo.flexion

    def test_mvc_window_saturation(self):
        # every sample at or above the upper threshold maps to exactly 1.0
        cal = simple_cal()
        rng = np.random.default_rng(3)
        for v in cal.flexor_upper + rng.uniform(0, 3, 50):
            s = normalize(RawEmgSample(0, cal.flexor_offset + v, 0.0), cal)
            assert s.flexion == 1.0


def quiet_spec(**overrides):
    base = dict(
        mode="synthetic",
        drift_rate=0.0,
        seed=7,
        baseline_noise_v=0.0,
        drift_walk_sigma=0.0,
    )
    base.update(overrides)
    return EmgSourceSpec(**base)


class TestSyntheticSource:
    def test_quiescent_channel_is_offsets_exactly(self):
        spec = quiet_spec()
        src = SyntheticEmgSource(spec)
        s = src.sample(0, (0.0, 0.0))
        assert s.flexor_v == spec.flexor_offset_v
        assert s.extensor_v == spec.extensor_offset_v

    def test_same_seed_bit_reproducible(self):
        spec = EmgSourceSpec(seed=42)
        a = SyntheticEmgSource(spec)
        b = SyntheticEmgSource(spec)
        intents = [(0.1 * (i % 10), 0.05 * (i % 7)) for i in range(2000)]
        for t, intent in enumerate(intents):
            sa, sb = a.sample(t, intent), b.sample(t, intent)
            assert sa.flexor_v == sb.flexor_v
            assert sa.extensor_v == sb.extensor_v

    def test_drift_integrates_linearly(self):
        # oracle: pure linear ramp, drift_rate * elapsed seconds
        rate = 0.001
        spec = quiet_spec(drift_rate=rate)
        src = SyntheticEmgSource(spec)
        s = src.sample(10_000, (0.0, 0.0))
        expected = rate * (10_000 / 1000.0)
        assert s.flexor_v - spec.flexor_offset_v == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.01)

    def test_intent_scales_envelope_to_mvc(self):
        spec = EmgSourceSpec(seed=11, drift_rate=0.0, drift_walk_sigma=0.0)
        src = SyntheticEmgSource(spec)
        vals = [abs(src.sample(t, (1.0, 0.0)).flexor_v - spec.flexor_offset_v)
                for t in range(5000)]
        assert np.mean(vals) == pytest.approx(spec.mvc_flexor_v, rel=0.1)


class TestRezero:
    def test_offsets_replaced_by_window_mean(self):
        cal = simple_cal()
        window = constant_window(0.15, 0.06, n=500)
        cal2 = rezero(cal, window)
        assert cal2.flexor_offset == pytest.approx(0.15)
        assert cal2.extensor_offset == pytest.approx(0.06)
        assert cal2.flexor_upper == cal.flexor_upper
        assert cal2.flexor_lower == cal.flexor_lower

    def test_idempotent_on_same_baseline(self):
        cal = simple_cal()
        window = constant_window(cal.flexor_offset, cal.extensor_offset, n=500)
        assert rezero(cal, window) == cal

    def test_short_window_rejected(self):
        with pytest.raises(RezeroWindowError):
            rezero(simple_cal(), constant_window(0.2, 0.2, n=499))

    def test_drifted_quiescent_normalizes_to_zero_after_rezero(self):
        # derived: drift the baseline, re-zero, then the quiescent tail must
        # condition and normalize to exactly zero activation
        spec = EmgSourceSpec(seed=5, drift_rate=0.002, drift_walk_sigma=0.0)
        cal = run_calibration_procedure(spec)
        src = SyntheticEmgSource(spec)
        drifted = [src.sample(t, (0.0, 0.0)) for t in range(60_000, 60_500)]
        cal2 = rezero(cal, drifted)
        follower = EnvelopeFollower()
        for t in range(60_500, 61_000):
            raw = src.sample(t, (0.0, 0.0))
            pair = normalize(follower.process(raw, cal2), cal2)
        assert pair.flexion == 0.0
        assert pair.extension == 0.0

    def test_without_rezero_drift_leaks_through(self):
        spec = EmgSourceSpec(seed=5, drift_rate=0.02, drift_walk_sigma=0.0)
        cal = run_calibration_procedure(spec)
        src = SyntheticEmgSource(spec)
        follower = EnvelopeFollower()
        for t in range(60_000, 60_500):
            raw = src.sample(t, (0.0, 0.0))
            pair = normalize(follower.process(raw, cal), cal)
        assert pair.flexion > 0.0


class TestReplay:
    def test_round_trip_and_exhaustion(self, tmp_path):
        path = tmp_path / "trace.csv"
        rows = [(t, 0.1 + 0.001 * t, 0.05) for t in range(50)]
        write_trace(path, rows)
        src = ReplayEmgSource(path)
        for t in range(50):
            s = src.sample(t)
            assert s.flexor_v == pytest.approx(0.1 + 0.001 * t)
        with pytest.raises(ReplayExhausted):
            src.sample(50)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        cal = simple_cal()
        path = tmp_path / "cal.txt"
        save_calibration(cal, path)
        assert load_calibration(path) == cal

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "cal.txt"
        path.write_text("flexor_offset = 0.1\n")
        with pytest.raises(CalibrationInputError):
            load_calibration(path)


class TestCalibrationProcedure:
    def test_upper_threshold_tracks_source_mvc(self):
        spec = EmgSourceSpec(seed=9)
        cal = run_calibration_procedure(spec)
        assert cal.flexor_upper == pytest.approx(0.5 * spec.mvc_flexor_v, rel=0.1)
        assert cal.extensor_upper == pytest.approx(0.5 * spec.mvc_extensor_v, rel=0.1)
        assert cal.flexor_upper > cal.flexor_lower

    def test_full_intent_saturates_normalized_output(self):
        spec = EmgSourceSpec(seed=9)
        cal = run_calibration_procedure(spec)
        src = SyntheticEmgSource(spec)
        follower = EnvelopeFollower()
        values = []
        for t in range(1000):
            pair = normalize(follower.process(src.sample(t, (1.0, 0.0)), cal), cal)
            if t >= 100:
                values.append(pair.flexion)
        assert np.mean(values) > 0.95
