#!/usr/bin/env python3
"""Over-grasp demonstration: the same aggressive squeeze with and without
the grasp-pressure modulation."""

import numpy as np

from reflexhand.scenarios import make_overgrasp_scenario
from reflexhand.trials import run_trial


def main() -> None:
    scenario = make_overgrasp_scenario()
    for condition in ("standard", "tactile"):
        record = run_trial(scenario, condition, seed=scenario.seed)
        lost = [e for e in record.events if e["event"] == "object_lost"]
        p_max = float(np.max(record.traces["p"]))
        outcome = lost[0]["kind"] if lost else "held"
        print(f"{condition:>9}: outcome {outcome:>8}, peak pressure {p_max:.3f}")


if __name__ == "__main__":
    main()
