"""Trial execution, task scoring, tactile metrics, and log files.

A trial runs the session pipeline against one scenario until the object is
settled in the end bin or the time limit expires. Milestones give the
task score (lift 1/3, vicinity 2/3, placement 1). Rates are normalized by
the completion time, or by the full limit for failed trials.

Outputs per trial: a trace CSV (one row per tick) and an events JSONL;
batch runs add a session summary CSV.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import SessionConfig
from .plant import ObjectStatus
from .scenario import Scenario
from .session import NumericFault, SimSession, TICK_RATE_HZ
from .tactile import ContactSide

CONTACT_DEBOUNCE_TICKS = 20

SCORE_LIFTED = 1.0 / 3.0
SCORE_NEAR = 2.0 / 3.0
SCORE_PLACED = 1.0

TRACE_COLUMNS = (
    "tick", "u_c", "u_o", "voltage", "aperture", "p", "side", "x",
    "tactor_current", "carrier_f", "D", "H", "status",
)

METRIC_NAMES = ("score", "time_remaining_s", "exploration_contact_rate", "fast_slip_rate")


@dataclass
class TrialRecord:
    trial_id: str
    condition: str
    seed: int
    time_limit_s: float
    completed: bool
    completion_tick: Optional[int]
    score: float
    time_remaining_s: float
    exploration_contact_rate: float
    fast_slip_rate: float
    events: list[dict]
    traces: Optional[dict[str, np.ndarray]]
    aborted: bool = False
    abort_reason: Optional[str] = None

    @property
    def trial_time_s(self) -> float:
        if self.completed and self.completion_tick is not None:
            return (self.completion_tick + 1) / TICK_RATE_HZ
        return self.time_limit_s


@dataclass
class SessionSummary:
    n_trials: int
    means: dict[str, float]
    variances: dict[str, float]
    single_trial: bool  # sample variance undefined for n=1; reported as 0


def score(events: Sequence[dict]) -> float:
    """Milestone score: 0, 1/3 (lifted), 2/3 (near end bin), 1 (placed)."""
    names = {e["event"] for e in events}
    if "placed" in names:
        return SCORE_PLACED
    if "near_end_bin" in names:
        return SCORE_NEAR
    if "lifted" in names:
        return SCORE_LIFTED
    return 0.0


def _contact_episodes(events: Sequence[dict], end_tick: int) -> list[tuple[int, int]]:
    """Raw (start, end) contact runs from the event stream."""
    episodes = []
    open_start: Optional[int] = None
    for e in events:
        if e["event"] == "contact_start" and open_start is None:
            open_start = e["tick"]
        elif e["event"] == "contact_end" and open_start is not None:
            episodes.append((open_start, e["tick"]))
            open_start = None
    if open_start is not None:
        episodes.append((open_start, end_tick))
    return episodes


def debounced_contact_episodes(
    events: Sequence[dict], end_tick: int, debounce_ticks: int = CONTACT_DEBOUNCE_TICKS
) -> list[tuple[int, int]]:
    """Merge runs separated by short gaps, then drop runs shorter than the
    debounce window."""
    raw = _contact_episodes(events, end_tick)
    merged: list[list[int]] = []
    for start, end in raw:
        if merged and start - merged[-1][1] < debounce_ticks:
            merged[-1][1] = end
        else:
            merged.append([start, end])
    return [(s, e) for s, e in merged if e - s >= debounce_ticks]


def first_grasp_tick(events: Sequence[dict]) -> Optional[int]:
    for e in events:
        if e["event"] == "grasp_start":
            return e["tick"]
    return None


def exploration_contact_rate(events: Sequence[dict], trial_time_s: float) -> float:
    """Debounced finger-contact episodes beginning before the first grasp,
    divided by the trial time."""
    end_tick = int(round(trial_time_s * TICK_RATE_HZ))
    grasp = first_grasp_tick(events)
    cutoff = grasp if grasp is not None else end_tick + 1
    episodes = debounced_contact_episodes(events, end_tick)
    count = sum(1 for start, _ in episodes if start < cutoff)
    return count / trial_time_s


def fast_slip_rate(events: Sequence[dict], trial_time_s: float) -> float:
    count = sum(1 for e in events if e["event"] == "fast_slip")
    return count / trial_time_s


def build_trial_record(
    session: SimSession,
    trial_id: str,
    seed: int,
    time_limit_s: float,
    completion_tick: Optional[int],
    aborted: bool = False,
    abort_reason: Optional[str] = None,
) -> TrialRecord:
    """Close out a finished session: emit the end event and compute metrics."""
    completed = completion_tick is not None
    if aborted:
        reason = "aborted"
    elif completed:
        reason = "completed"
    else:
        reason = "timeout"
    session.emit(session.tick_index, "trial_end", reason=reason)

    if completed:
        completion_s = (completion_tick + 1) / TICK_RATE_HZ
        time_remaining = max(0.1, time_limit_s - completion_s)
        trial_time = completion_s
    else:
        time_remaining = 0.0
        trial_time = time_limit_s

    events = session.events
    return TrialRecord(
        trial_id=trial_id,
        condition=session.condition,
        seed=seed,
        time_limit_s=time_limit_s,
        completed=completed,
        completion_tick=completion_tick,
        score=score(events),
        time_remaining_s=time_remaining,
        exploration_contact_rate=exploration_contact_rate(events, trial_time),
        fast_slip_rate=fast_slip_rate(events, trial_time),
        events=events,
        traces=session.trace.arrays() if session.trace is not None else None,
        aborted=aborted,
        abort_reason=abort_reason,
    )


def run_trial(
    scenario: Scenario,
    condition: str,
    seed: int,
    config: Optional[SessionConfig] = None,
    record_traces: bool = True,
) -> TrialRecord:
    """Run one scenario to completion or timeout and compute its metrics."""
    base = config if config is not None else SessionConfig()
    cfg = dataclasses.replace(base, condition=condition)
    session = SimSession(cfg, scenario=scenario, seed=seed, record_traces=record_traces)
    compiled = session.compiled

    aborted = False
    abort_reason = None
    completion_tick: Optional[int] = None
    try:
        for t in range(compiled.n_ticks):
            perts = compiled.perturbations_by_tick.get(t, ())
            session.step(compiled.intent_at(t), compiled.arm_vel_at(t), perts)
            if session.completed:
                completion_tick = t
                break
    except NumericFault as exc:
        aborted = True
        abort_reason = str(exc)

    return build_trial_record(
        session,
        trial_id=scenario.name,
        seed=seed,
        time_limit_s=scenario.time_limit_s,
        completion_tick=completion_tick,
        aborted=aborted,
        abort_reason=abort_reason,
    )


def summarize(records: Sequence[TrialRecord]) -> SessionSummary:
    if not records:
        raise ValueError("no trial records to summarize")
    means = {}
    variances = {}
    for name in METRIC_NAMES:
        values = np.array([getattr(r, name) for r in records], dtype=float)
        means[name] = float(np.mean(values))
        variances[name] = float(np.var(values, ddof=1)) if len(values) > 1 else 0.0
    return SessionSummary(
        n_trials=len(records),
        means=means,
        variances=variances,
        single_trial=len(records) == 1,
    )


# --- files -------------------------------------------------------------------

_SIDE_NAMES = {int(s): s.name.lower() for s in ContactSide}
_SIDE_CODES = {name: code for code, name in _SIDE_NAMES.items()}
_STATUS_NAMES = {int(s): s.name.lower() for s in ObjectStatus}
_STATUS_CODES = {name: code for code, name in _STATUS_NAMES.items()}


def write_trial_csv(record: TrialRecord, path: str | Path) -> None:
    if record.traces is None:
        raise ValueError("trial was run without trace recording")
    tr = record.traces
    n = len(tr["u_c"])
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_COLUMNS)
        for i in range(n):
            writer.writerow(
                (
                    i,
                    repr(float(tr["u_c"][i])),
                    repr(float(tr["u_o"][i])),
                    repr(float(tr["voltage"][i])),
                    repr(float(tr["aperture"][i])),
                    repr(float(tr["p"][i])),
                    _SIDE_NAMES[int(tr["side"][i])],
                    repr(float(tr["x"][i])),
                    repr(float(tr["tactor_current"][i])),
                    repr(float(tr["carrier_f"][i])),
                    repr(float(tr["D"][i])),
                    repr(float(tr["H"][i])),
                    _STATUS_NAMES[int(tr["status"][i])],
                )
            )


def read_trial_csv(path: str | Path) -> dict[str, np.ndarray]:
    cols: dict[str, list] = {name: [] for name in TRACE_COLUMNS}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header}")
        for row in reader:
            for name, value in zip(TRACE_COLUMNS, row):
                cols[name].append(value)
    out: dict[str, np.ndarray] = {}
    for name, values in cols.items():
        if name == "tick":
            out[name] = np.array([int(v) for v in values])
        elif name == "side":
            out[name] = np.array([_SIDE_CODES[v] for v in values], dtype=np.int8)
        elif name == "status":
            out[name] = np.array([_STATUS_CODES[v] for v in values], dtype=np.int8)
        else:
            out[name] = np.array([float(v) for v in values])
    return out


def write_events_jsonl(record: TrialRecord, path: str | Path) -> None:
    with open(path, "w") as f:
        for event in record.events:
            f.write(json.dumps(event, default=float) + "\n")


def read_events_jsonl(path: str | Path) -> list[dict]:
    events = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


SUMMARY_COLUMNS = (
    "trial_id", "condition", "seed", "score", "time_remaining_s",
    "exploration_contact_rate", "fast_slip_rate", "completed",
)


def write_session_summary(records: Sequence[TrialRecord], path: str | Path) -> None:
    """One row per trial; cross-trial statistics go to the stats JSON."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_COLUMNS)
        for r in records:
            writer.writerow(
                (
                    r.trial_id,
                    r.condition,
                    r.seed,
                    repr(float(r.score)),
                    repr(float(r.time_remaining_s)),
                    repr(float(r.exploration_contact_rate)),
                    repr(float(r.fast_slip_rate)),
                    int(r.completed),
                )
            )


def write_session_stats(summary: SessionSummary, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(
            {
                "n_trials": summary.n_trials,
                "means": summary.means,
                "variances": summary.variances,
                "single_trial": summary.single_trial,
            },
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")
