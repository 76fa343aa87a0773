import json

import numpy as np
import pytest

from reflexhand.config import SessionConfig
from reflexhand.scenarios import make_pick_place_scenario
from reflexhand.session import SimSession
from reflexhand.trials import (
    SCORE_LIFTED,
    SCORE_NEAR,
    SCORE_PLACED,
    TrialRecord,
    build_trial_record,
    debounced_contact_episodes,
    exploration_contact_rate,
    fast_slip_rate,
    read_events_jsonl,
    read_trial_csv,
    run_trial,
    score,
    summarize,
    write_events_jsonl,
    write_session_summary,
    write_trial_csv,
)


def ev(tick, name, **kw):
    return {"tick": tick, "event": name, **kw}


class TestScore:
    def test_no_milestones(self):
        assert score([ev(0, "trial_start")]) == 0.0

    def test_lift_only(self):
        assert score([ev(0, "trial_start"), ev(100, "lifted")]) == pytest.approx(1 / 3)

    def test_lift_and_vicinity(self):
        events = [ev(0, "trial_start"), ev(100, "lifted"), ev(200, "near_end_bin")]
        assert score(events) == pytest.approx(2 / 3)

    def test_full_placement(self):
        events = [
            ev(0, "trial_start"), ev(100, "lifted"),
            ev(200, "near_end_bin"), ev(300, "placed"),
        ]
        assert score(events) == 1.0

    def test_values_are_exactly_the_milestone_fractions(self):
        assert {SCORE_LIFTED, SCORE_NEAR, SCORE_PLACED} == {1 / 3, 2 / 3, 1.0}


class TestContactEpisodes:
    def test_short_blip_rejected(self):
        events = [ev(100, "contact_start"), ev(110, "contact_end")]
        assert debounced_contact_episodes(events, 1000) == []

    def test_flicker_merged(self):
        events = [
            ev(100, "contact_start"), ev(130, "contact_end"),
            ev(140, "contact_start"), ev(180, "contact_end"),
        ]
        assert debounced_contact_episodes(events, 1000) == [(100, 180)]

    def test_separate_episodes_counted(self):
        events = [
            ev(100, "contact_start"), ev(150, "contact_end"),
            ev(400, "contact_start"), ev(460, "contact_end"),
        ]
        assert len(debounced_contact_episodes(events, 1000)) == 2

    def test_open_episode_closed_at_end(self):
        events = [ev(900, "contact_start")]
        assert debounced_contact_episodes(events, 1000) == [(900, 1000)]


def synthetic_contact_events(n, spacing=100, start=0, length=50):
    events = []
    t = start
    for _ in range(n):
        events.append(ev(t, "contact_start"))
        events.append(ev(t + length, "contact_end"))
        t += spacing
    return events


class TestRates:
    def test_twelve_episodes_thirty_seconds(self):
        events = synthetic_contact_events(12)
        assert exploration_contact_rate(events, 30.0) == pytest.approx(12 / 30)

    def test_no_contacts(self):
        assert exploration_contact_rate([], 60.0) == 0.0

    def test_failed_trial_divisor(self):
        events = synthetic_contact_events(6)
        assert exploration_contact_rate(events, 60.0) == pytest.approx(0.1)

    def test_contacts_after_grasp_excluded(self):
        events = synthetic_contact_events(3) + [ev(500, "grasp_start")]
        events += synthetic_contact_events(4, start=600)
        assert exploration_contact_rate(events, 10.0) == pytest.approx(3 / 10)

    def test_fast_slip_rate_success(self):
        events = [ev(t, "fast_slip") for t in (100, 200, 300)]
        assert fast_slip_rate(events, 50.0) == pytest.approx(0.06)

    def test_fast_slip_rate_none(self):
        assert fast_slip_rate([], 60.0) == 0.0

    def test_fast_slip_rate_failure_divisor(self):
        events = [ev(t, "fast_slip") for t in range(0, 600, 100)]
        assert fast_slip_rate(events, 60.0) == pytest.approx(0.1)


class TestTimeRemaining:
    def make_session(self):
        return SimSession(SessionConfig(), scenario=None, seed=0, record_traces=False)

    def test_timeout_zero_remaining(self):
        record = build_trial_record(
            self.make_session(), "t", 0, time_limit_s=60.0, completion_tick=None
        )
        assert record.time_remaining_s == 0.0
        assert not record.completed

    def test_boundary_completion_is_tenth_second(self):
        record = build_trial_record(
            self.make_session(), "t", 0, time_limit_s=60.0, completion_tick=59_999
        )
        assert record.time_remaining_s == pytest.approx(0.1)

    def test_early_completion(self):
        record = build_trial_record(
            self.make_session(), "t", 0, time_limit_s=60.0, completion_tick=19_999
        )
        assert record.time_remaining_s == pytest.approx(40.0)

    def test_remaining_range_invariant(self):
        for tick in (0, 10_000, 59_000, 59_999):
            r = build_trial_record(
                self.make_session(), "t", 0, time_limit_s=60.0, completion_tick=tick
            )
            assert r.time_remaining_s == 0.0 or 0.1 <= r.time_remaining_s < 60.0


class TestSummarize:
    def fake_record(self, score_value):
        return TrialRecord(
            trial_id="x", condition="tactile", seed=0, time_limit_s=60.0,
            completed=score_value == 1.0, completion_tick=None, score=score_value,
            time_remaining_s=0.0, exploration_contact_rate=0.0, fast_slip_rate=0.0,
            events=[], traces=None,
        )

    def test_mean_of_scores(self):
        s = summarize([self.fake_record(v) for v in (1.0, 1.0, 0.0)])
        assert s.means["score"] == pytest.approx(2 / 3)

    def test_single_trial_variance_zero_with_flag(self):
        s = summarize([self.fake_record(0.5)])
        assert s.variances["score"] == 0.0
        assert s.single_trial

    def test_twenty_identical_records(self):
        s = summarize([self.fake_record(1.0) for _ in range(20)])
        assert s.variances["score"] == 0.0
        assert not s.single_trial

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])


class TestRunTrial:
    def test_perfect_trial_scores_one(self):
        sc = make_pick_place_scenario("perfect", taps=("dorsal",))
        r = run_trial(sc, "tactile", seed=11)
        assert r.completed and r.score == 1.0
        assert 0.1 <= r.time_remaining_s < 60.0
        assert r.exploration_contact_rate > 0.0

    def test_metrics_match_event_recount(self):
        sc = make_pick_place_scenario("recount", taps=("palmar", "dorsal"))
        r = run_trial(sc, "tactile", seed=4)
        trial_time = r.trial_time_s
        assert r.fast_slip_rate == sum(
            1 for e in r.events if e["event"] == "fast_slip"
        ) / trial_time
        assert r.exploration_contact_rate == exploration_contact_rate(r.events, trial_time)

    def test_replay_determinism(self):
        sc = make_pick_place_scenario("det", taps=("palmar",))
        a = run_trial(sc, "tactile", seed=9)
        b = run_trial(sc, "tactile", seed=9)
        assert a.events == b.events
        for name in a.traces:
            assert np.array_equal(a.traces[name], b.traces[name])

    def test_numeric_fault_aborts_with_diagnostic(self, monkeypatch):
        from reflexhand import session as session_mod

        original = session_mod.SimSession.step

        def poisoned(self, intent, arm_vel, perturbations=()):
            if self.tick_index == 500:
                self.plant.obj.x = float("nan")
            return original(self, intent, arm_vel, perturbations)

        monkeypatch.setattr(session_mod.SimSession, "step", poisoned)
        sc = make_pick_place_scenario("faulty")
        r = run_trial(sc, "tactile", seed=1)
        assert r.aborted
        assert "non-finite" in r.abort_reason
        assert r.events[-1] == {"tick": 500, "event": "trial_end", "reason": "aborted"}


class TestReplayTrial:
    def test_trial_runs_from_recorded_trace(self, tmp_path):
        # record the raw EMG of a synthetic run, then replay it through the
        # same scenario; the replayed trial reproduces the synthetic one
        from reflexhand.emg import EmgSourceSpec, SyntheticEmgSource, write_trace

        sc = make_pick_place_scenario("replayed")
        compiled = sc.compile()
        spec = EmgSourceSpec(seed=21)
        source = SyntheticEmgSource(spec)
        rows = []
        for t in range(compiled.n_ticks):
            s = source.sample(t, compiled.intent_at(t))
            rows.append((t, s.flexor_v, s.extensor_v))
        trace_path = tmp_path / "emg.csv"
        write_trace(trace_path, rows)

        live = run_trial(sc, "tactile", seed=21)
        sc.emg_overrides = {"mode": "replay", "replay_path": str(trace_path)}
        replayed = run_trial(sc, "tactile", seed=21)
        assert replayed.completed and replayed.score == 1.0
        assert replayed.completion_tick == live.completion_tick
        assert np.array_equal(replayed.traces["u_c"], live.traces["u_c"])


class TestLogFiles:
    def test_trace_csv_round_trip(self, tmp_path):
        sc = make_pick_place_scenario("rt")
        r = run_trial(sc, "tactile", seed=2)
        path = tmp_path / "trial.csv"
        write_trial_csv(r, path)
        back = read_trial_csv(path)
        for name, arr in r.traces.items():
            assert np.array_equal(back[name], arr), name

    def test_events_jsonl_round_trip(self, tmp_path):
        sc = make_pick_place_scenario("rt2")
        r = run_trial(sc, "standard", seed=2)
        path = tmp_path / "ev.jsonl"
        write_events_jsonl(r, path)
        assert read_events_jsonl(path) == json.loads(json.dumps(r.events, default=float))

    def test_summary_row_count(self, tmp_path):
        sc = make_pick_place_scenario("s")
        records = [run_trial(sc, "tactile", seed=s, record_traces=False) for s in range(3)]
        path = tmp_path / "summary.csv"
        write_session_summary(records, path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 4  # header + one row per trial
