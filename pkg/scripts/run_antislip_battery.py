#!/usr/bin/env python3
"""Seeded slip-perturbation battery: reflexes on vs off, retention stats."""

import argparse
import time

from reflexhand.scenarios import make_antislip_scenario
from reflexhand.trials import run_trial


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=100)
    args = parser.parse_args()

    t0 = time.perf_counter()
    stats = {}
    for condition in ("tactile", "standard"):
        retained = full_score = 0
        for seed in range(args.seeds):
            record = run_trial(
                make_antislip_scenario(seed), condition, seed=seed, record_traces=False
            )
            lost = any(e["event"] == "object_lost" for e in record.events)
            retained += not lost
            full_score += record.score == 1.0
        stats[condition] = (retained, full_score)

    n = args.seeds
    for condition, (retained, full_score) in stats.items():
        print(f"{condition:>9}: retained {retained}/{n} ({100*retained/n:.0f}%), "
              f"score 1.0 in {full_score}/{n}")
    print(f"wall time {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
