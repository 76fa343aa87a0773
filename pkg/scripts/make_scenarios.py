#!/usr/bin/env python3
"""Write the scripted scenario suites to a directory as JSON files."""

import argparse
from pathlib import Path

from reflexhand.scenarios import (
    make_antislip_scenario,
    make_batch_scenarios,
    make_overgrasp_scenario,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="scenarios", help="output directory")
    parser.add_argument("--battery-seeds", type=int, default=100)
    args = parser.parse_args()

    out = Path(args.out)
    (out / "batch").mkdir(parents=True, exist_ok=True)
    (out / "antislip").mkdir(parents=True, exist_ok=True)

    for sc in make_batch_scenarios():
        sc.save(out / "batch" / f"{sc.name}.json")
    overgrasp = make_overgrasp_scenario()
    overgrasp.save(out / f"{overgrasp.name}.json")
    for seed in range(args.battery_seeds):
        sc = make_antislip_scenario(seed)
        sc.save(out / "antislip" / f"{sc.name}.json")
    print(f"wrote scenarios under {out}/")


if __name__ == "__main__":
    main()
