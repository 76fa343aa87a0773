"""Command-line entry points: batch trial runs, the live session service,
and trace export."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, SessionConfig, load_config
from .scenario import ScenarioError, load_scenario
from . import trials as trials_mod

log = logging.getLogger("reflexhand")


def _setup_logging() -> None:
    level = os.environ.get("REFLEXHAND_LOG", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")


def run_batch(
    scenario_paths: list[str | Path],
    config: SessionConfig,
    out_dir: str | Path,
    base_seed: int = 0,
) -> int:
    """Run every scenario, write per-trial logs and the session summary.

    Returns a nonzero exit status if any trial aborted on a numeric fault.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    status = 0
    for index, path in enumerate(scenario_paths):
        scenario = load_scenario(path)
        seed = scenario.seed if scenario.seed is not None else base_seed + index
        record = trials_mod.run_trial(scenario, config.condition, seed, config=config)
        records.append(record)
        stem = f"trial_{record.trial_id}"
        trials_mod.write_trial_csv(record, out / f"{stem}.csv")
        trials_mod.write_events_jsonl(record, out / f"{stem}.events.jsonl")
        if record.aborted:
            log.error("trial %s aborted: %s", record.trial_id, record.abort_reason)
            status = 1
        else:
            log.info(
                "trial %s: score %.2f, %.1f s remaining",
                record.trial_id, record.score, record.time_remaining_s,
            )
    trials_mod.write_session_summary(records, out / "session_summary.csv")
    trials_mod.write_session_stats(trials_mod.summarize(records), out / "session_stats.json")
    return status


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else SessionConfig()
    config = dataclasses.replace(config, condition=args.condition)
    for path in args.scenario:
        if not Path(path).exists():
            print(f"error: scenario file not found: {path}", file=sys.stderr)
            return 2
    try:
        return run_batch(args.scenario, config, args.out, base_seed=args.seed)
    except (ScenarioError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    config = load_config(args.config) if args.config else SessionConfig()
    config = dataclasses.replace(config, condition=args.condition)
    app = create_app(config, out_dir=args.out, seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    from .export import TraceIntegrityError, export_traces

    out = args.out
    if out is None:
        suffix = ".svg" if args.format == "svg" else ".export.csv"
        out = str(Path(args.trial).with_suffix(suffix))
    try:
        export_traces(args.trial, args.format, out)
    except FileNotFoundError:
        print(f"error: trial file not found: {args.trial}", file=sys.stderr)
        return 2
    except TraceIntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reflexhand",
        description="Myoelectric hand control stack and grasp simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scripted scenarios headless")
    p_run.add_argument("--scenario", nargs="+", required=True, help="scenario JSON file(s)")
    p_run.add_argument("--condition", choices=("standard", "tactile"), default="tactile")
    p_run.add_argument("--seed", type=int, default=0,
                       help="base seed for scenarios that do not pin their own")
    p_run.add_argument("--out", required=True, help="output directory for logs")
    p_run.add_argument("--config", help="session config JSON")
    p_run.set_defaults(func=_cmd_run)

    p_serve = sub.add_parser("serve", help="run the live operator session service")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--condition", choices=("standard", "tactile"), default="tactile")
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--out", default="live_logs", help="directory for live trial logs")
    p_serve.add_argument("--config", help="session config JSON")
    p_serve.set_defaults(func=_cmd_serve)

    p_export = sub.add_parser("export", help="export plot-ready traces from a trial log")
    p_export.add_argument("--trial", required=True, help="trial trace CSV")
    p_export.add_argument("--format", choices=("csv", "svg"), default="csv")
    p_export.add_argument("--out", help="output path (default: derived from input)")
    p_export.set_defaults(func=_cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
