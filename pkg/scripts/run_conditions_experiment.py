#!/usr/bin/env python3
"""Run the 20-trial session under both conditions and compare the metrics.

Mirrors the study layout: per-trial score, time remaining, exploration
contact rate, and fast slip rate, then per-condition means and variances.
"""

import argparse
import time

from reflexhand.scenarios import make_batch_scenarios
from reflexhand.trials import run_trial, summarize


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--base-seed", type=int, default=1000)
    args = parser.parse_args()

    scenarios = make_batch_scenarios(args.trials, base_seed=args.base_seed)
    for condition in ("standard", "tactile"):
        t0 = time.perf_counter()
        records = [
            run_trial(sc, condition, seed=sc.seed, record_traces=False)
            for sc in scenarios
        ]
        summary = summarize(records)
        wall = time.perf_counter() - t0
        print(f"\n== {condition} condition ({args.trials} trials, {wall:.1f}s) ==")
        for name in ("score", "time_remaining_s", "exploration_contact_rate", "fast_slip_rate"):
            print(f"  {name:>26}: mean {summary.means[name]:8.4f}   "
                  f"variance {summary.variances[name]:8.5f}")


if __name__ == "__main__":
    main()
