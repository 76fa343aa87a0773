"""Scripted scenario generators for the pick-and-place task.

All generators share one open-loop template: reach over the start bin,
optionally tap the object a few times to mimic haptic search, close onto
it, lift, carry to the end bin, lower, and release. Variants re-time the
grip burst (over-grasp demonstration) or inject mid-transport friction and
load perturbations (anti-slip battery).

Timings assume the default plant and sensor parameters; the scripts leave
margins so seeded sensor and EMG noise do not change the outcomes.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .plant import PlantParams, SceneSpec
from .scenario import Perturbation, Scenario

# grasp pose for a contact at arc fraction `frac` of the finger pad
_HOME = (0.0, -0.22, 0.12)
_GRASP_Z = 0.10
_LIFT_Z = 0.18
_LOWER_Z = 0.13

# lateral poses that graze the open pads against the object (aperture fully
# open, pads at +-0.05 m)
_TAP_X = {"palmar": -0.040, "dorsal": -0.0605}

# with full flexion the envelope saturates within ~0.05 s and the aperture
# travels 0.08 m to the object diameter at 0.1 m/s
CLOSE_TRAVEL_S = 0.81


def grasp_wrist_y(frac: float, params: Optional[PlantParams] = None) -> float:
    params = params or PlantParams()
    return 0.0 - params.finger_reach - frac * params.finger_length


def _pick_place_script(
    frac: float = 0.5,
    taps: Sequence[str] = (),
    burst_extra_s: float = 0.10,
    hold_level: float = 0.0,
    lift_delay_s: float = 0.15,
    transport_s: float = 1.0,
    settle_s: float = 0.25,
) -> dict:
    """Waypoints, intent rows, and key times for one pick-and-place run."""
    gy = grasp_wrist_y(frac)
    waypoints = [(0.0, *_HOME), (0.8, 0.0, gy, _GRASP_Z)]
    t = 0.8
    for side in taps:
        x = _TAP_X[side]
        waypoints.append((t + 0.20, x, gy, _GRASP_Z))
        waypoints.append((t + 0.40, x, gy, _GRASP_Z))  # dwell on the object
        waypoints.append((t + 0.60, 0.0, gy, _GRASP_Z))
        t += 0.60

    t_close = t + 0.10
    t_contact = t_close + CLOSE_TRAVEL_S
    t_burst_end = t_contact + burst_extra_s
    t_lift = t_burst_end + lift_delay_s
    t_up = t_lift + 0.5
    t_across = t_up + transport_s
    t_down = t_across + 0.4
    t_release = t_down + 0.15
    t_done = t_release + 0.4

    end_x = SceneSpec().end_bin_center[0]
    waypoints += [
        (t_lift, 0.0, gy, _GRASP_Z),
        (t_up, 0.0, gy, _LIFT_Z),
        (t_across, end_x, gy, _LIFT_Z),
        (t_down, end_x, gy, _LOWER_Z),
    ]
    intent = [
        (0.0, 0.0, 0.0),
        (t_close, 1.0, 0.0),
        (t_burst_end, hold_level, 0.0),
        (t_release, 0.0, 1.0),
        (t_done, 0.0, 0.0),
    ]
    return {
        "waypoints": waypoints,
        "intent": intent,
        "t_contact": t_contact,
        "t_lift": t_lift,
        "t_up": t_up,
        "t_across": t_across,
        "t_release": t_release,
        "t_done": t_done,
    }


def make_pick_place_scenario(
    name: str,
    seed: Optional[int] = None,
    taps: Sequence[str] = (),
    frac: float = 0.5,
    burst_extra_s: float = 0.10,
    perturbations: Sequence[Perturbation] = (),
    time_limit_s: float = 60.0,
) -> Scenario:
    script = _pick_place_script(frac=frac, taps=taps, burst_extra_s=burst_extra_s)
    return Scenario(
        name=name,
        time_limit_s=time_limit_s,
        seed=seed,
        arm_waypoints=script["waypoints"],
        intent=script["intent"],
        perturbations=list(perturbations),
    )


def make_overgrasp_scenario(
    name: str = "overgrasp_demo", seed: int = 101, time_limit_s: float = 8.0
) -> Scenario:
    """Aggressive off-center squeeze: keeps driving well past a secure grip,
    easing off only after an unmitigated grip has already built ejection-level
    force. The grip sits far enough from the pad center that over-squeezing
    squirts the cylinder out."""
    frac = 0.8
    gy = grasp_wrist_y(frac)
    t_close = 0.9
    t_contact = t_close + CLOSE_TRAVEL_S
    t_lift = t_contact + 0.05
    t_ease = t_contact + 0.24
    waypoints = [
        (0.0, *_HOME),
        (0.8, 0.0, gy, _GRASP_Z),
        (t_lift, 0.0, gy, _GRASP_Z),
        (t_lift + 0.6, 0.0, gy, 0.22),
    ]
    intent = [
        (0.0, 0.0, 0.0),
        (t_close, 1.0, 0.0),
        (t_ease, 0.15, 0.0),
    ]
    return Scenario(
        name=name,
        time_limit_s=time_limit_s,
        seed=seed,
        arm_waypoints=waypoints,
        intent=intent,
    )


def make_antislip_scenario(seed: int, name: Optional[str] = None) -> Scenario:
    """Pick-and-place with one or two seeded friction collapses mid-transport.

    The grip burst is short so both conditions carry the object at a
    moderate force. Collapse magnitudes sit in the band where the residual
    friction cannot support the carried grip but can support the grip after
    a reflex pulse re-tightens; durations usually exceed the unmitigated
    escape time.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(9,)))
    script = _pick_place_script(burst_extra_s=0.0, transport_s=1.2)
    window = (script["t_up"] + 0.15, script["t_across"] - 0.35)
    n_events = 1 + int(rng.uniform() < 0.5)
    times = np.sort(rng.uniform(window[0], window[1], n_events))
    perturbations = []
    for i, t_s in enumerate(times):
        if i > 0 and t_s - times[i - 1] < 0.45:
            continue
        perturbations.append(
            Perturbation(
                t_s=float(round(t_s, 3)),
                kind="friction_multiplier",
                magnitude=float(round(rng.uniform(0.07, 0.11), 4)),
                duration_s=float(round(rng.uniform(0.06, 0.30), 3)),
            )
        )
    return Scenario(
        name=name or f"antislip_{seed:04d}",
        time_limit_s=15.0,
        seed=seed,
        arm_waypoints=script["waypoints"],
        intent=script["intent"],
        perturbations=perturbations,
    )


def make_batch_scenarios(n: int = 20, base_seed: int = 1000) -> list[Scenario]:
    """A varied set of scripted trials that all complete under the tactile
    condition: different search-tap patterns, grip offsets, and a few mild
    mid-transport perturbations."""
    tap_patterns = [
        (), ("dorsal",), ("palmar",), ("dorsal", "palmar"),
        ("palmar", "dorsal", "palmar"),
    ]
    scenarios = []
    for i in range(n):
        seed = base_seed + i
        taps = tap_patterns[i % len(tap_patterns)]
        frac = 0.45 + 0.02 * (i % 6)
        perturbations: list[Perturbation] = []
        if i % 5 == 4:
            script = _pick_place_script(frac=frac, taps=taps)
            perturbations.append(
                Perturbation(
                    t_s=round(script["t_up"] + 0.3 + 0.05 * (i % 3), 3),
                    kind="friction_multiplier",
                    magnitude=0.09,
                    duration_s=0.2,
                )
            )
        scenarios.append(
            make_pick_place_scenario(
                name=f"pick_place_{i:02d}",
                seed=seed,
                taps=taps,
                frac=frac,
                perturbations=perturbations,
            )
        )
    return scenarios
