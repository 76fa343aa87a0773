"""Scenario files: scripted arm motion, operator intent, and perturbations.

A scenario is a JSON document describing one trial: piecewise-linear wrist
waypoints, a step-hold flexion/extension intent script, scheduled
perturbation events, and optional overrides for the scene, plant, and EMG
source. Scenarios compile to per-tick arrays so trial execution is a flat
array walk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

TICK_RATE_HZ = 1000

_KNOWN_KEYS = {
    "name", "time_limit_s", "seed", "arm_waypoints", "intent",
    "perturbations", "scene", "plant", "emg",
}
_PERTURBATION_KINDS = {"mass_multiplier", "friction_multiplier"}


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate."""


@dataclass(frozen=True)
class Perturbation:
    t_s: float
    kind: str
    magnitude: float
    duration_s: Optional[float] = None


@dataclass
class Scenario:
    name: str
    time_limit_s: float = 60.0
    seed: Optional[int] = None
    # rows: (t_s, x, y, z); wrist holds the first row before its time and
    # the last row afterwards
    arm_waypoints: Sequence[Tuple[float, float, float, float]] = field(
        default_factory=lambda: [(0.0, 0.0, -0.25, 0.15)]
    )
    # rows: (t_s, flexion, extension); step-hold
    intent: Sequence[Tuple[float, float, float]] = field(
        default_factory=lambda: [(0.0, 0.0, 0.0)]
    )
    perturbations: Sequence[Perturbation] = field(default_factory=list)
    scene_overrides: dict = field(default_factory=dict)
    plant_overrides: dict = field(default_factory=dict)
    emg_overrides: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "time_limit_s": self.time_limit_s,
            "arm_waypoints": [list(w) for w in self.arm_waypoints],
            "intent": [list(i) for i in self.intent],
            "perturbations": [
                {
                    "t_s": p.t_s,
                    "kind": p.kind,
                    "magnitude": p.magnitude,
                    **({"duration_s": p.duration_s} if p.duration_s is not None else {}),
                }
                for p in self.perturbations
            ],
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.scene_overrides:
            out["scene"] = self.scene_overrides
        if self.plant_overrides:
            out["plant"] = self.plant_overrides
        if self.emg_overrides:
            out["emg"] = self.emg_overrides
        return out

    def save(self, path: str | Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def compile(self) -> "CompiledScenario":
        return CompiledScenario(self)


def scenario_from_dict(data: dict, name_hint: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(f"{name_hint}: top level must be an object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ScenarioError(f"{name_hint}: unknown keys {sorted(unknown)}")

    perturbations = []
    for i, p in enumerate(data.get("perturbations", [])):
        kind = p.get("kind")
        if kind not in _PERTURBATION_KINDS:
            raise ScenarioError(
                f"{name_hint}: perturbation {i} has unknown kind {kind!r}; "
                f"expected one of {sorted(_PERTURBATION_KINDS)}"
            )
        perturbations.append(
            Perturbation(
                t_s=float(p["t_s"]),
                kind=kind,
                magnitude=float(p["magnitude"]),
                duration_s=(None if p.get("duration_s") is None else float(p["duration_s"])),
            )
        )

    waypoints = [tuple(float(v) for v in row) for row in data.get("arm_waypoints", [])]
    intent = [tuple(float(v) for v in row) for row in data.get("intent", [])]
    for label, rows, width in (("arm_waypoints", waypoints, 4), ("intent", intent, 3)):
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ScenarioError(f"{name_hint}: {label}[{i}] needs {width} values")
            if not all(math.isfinite(v) for v in row):
                raise ScenarioError(f"{name_hint}: {label}[{i}] has non-finite values")
        if rows and sorted(r[0] for r in rows) != [r[0] for r in rows]:
            raise ScenarioError(f"{name_hint}: {label} times must be non-decreasing")

    kwargs = dict(
        name=str(data.get("name", name_hint)),
        time_limit_s=float(data.get("time_limit_s", 60.0)),
        seed=(None if data.get("seed") is None else int(data["seed"])),
        perturbations=perturbations,
        scene_overrides=dict(data.get("scene", {})),
        plant_overrides=dict(data.get("plant", {})),
        emg_overrides=dict(data.get("emg", {})),
    )
    if waypoints:
        kwargs["arm_waypoints"] = waypoints
    if intent:
        kwargs["intent"] = intent
    return Scenario(**kwargs)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})"
        ) from exc
    return scenario_from_dict(data, name_hint=path.stem)


class CompiledScenario:
    """Per-tick arrays for one scenario run."""

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.n_ticks = int(round(scenario.time_limit_s * TICK_RATE_HZ))
        t = np.arange(self.n_ticks + 1) / TICK_RATE_HZ

        wp = np.asarray(scenario.arm_waypoints, dtype=float)
        pos = np.stack(
            [np.interp(t, wp[:, 0], wp[:, 1 + axis]) for axis in range(3)], axis=1
        )
        self.start_wrist = tuple(float(v) for v in pos[0])
        # velocity commands that reproduce the waypoint path under Euler steps
        self.arm_vel = (pos[1:] - pos[:-1]) * TICK_RATE_HZ

        sched = np.asarray(scenario.intent, dtype=float)
        ticks = np.arange(self.n_ticks) / TICK_RATE_HZ
        idx = np.minimum(
            np.searchsorted(sched[:, 0], ticks, side="right") - 1, len(sched) - 1
        )
        idx = np.maximum(idx, 0)
        self.flexion = np.clip(sched[idx, 1], 0.0, 1.0)
        self.extension = np.clip(sched[idx, 2], 0.0, 1.0)

        self.perturbations_by_tick: dict[int, list[Perturbation]] = {}
        for p in scenario.perturbations:
            tick = int(round(p.t_s * TICK_RATE_HZ))
            self.perturbations_by_tick.setdefault(tick, []).append(p)

    def intent_at(self, tick: int) -> Tuple[float, float]:
        return float(self.flexion[tick]), float(self.extension[tick])

    def arm_vel_at(self, tick: int) -> Tuple[float, float, float]:
        row = self.arm_vel[tick]
        return float(row[0]), float(row[1]), float(row[2])
