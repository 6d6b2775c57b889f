"""Command line entry point: ``stokestrace <suite> [options]``.

Each subcommand runs one verification suite, writes ``report.json`` plus the
suite's CSV table into ``--out`` and exits with status 0 iff every record
passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .exceptions import StokesTraceError
from .harness import SUITES, ExperimentConfig, run_suite

__all__ = ["build_parser", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stokestrace", description="Run a trace formula verification suite.")
    sub = parser.add_subparsers(dest="suite", required=True)
    for name in SUITES:
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--config", help="JSON config file; command line options override it")
        p.add_argument("--seed", type=int, help="base seed (case i uses seed + i)")
        p.add_argument("--dim", type=int, help="ambient dimension")
        p.add_argument("--cases", type=int, help="number of seeded cases")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--fixed-clock", action="store_true", help="zero runtimes and timestamps for byte-identical reports")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {"seed": args.seed, "dim": args.dim, "cases": args.cases, "out": args.out}
    if args.fixed_clock:
        overrides["fixed_clock"] = True
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        if cfg.suite != args.suite:
            raise StokesTraceError(f"config is for suite {cfg.suite!r}, not {args.suite!r}")
        data = {k: v for k, v in overrides.items() if v is not None}
        return ExperimentConfig.from_json(_merged(cfg, data))
    return ExperimentConfig.for_suite(args.suite, **overrides)


def _merged(cfg: ExperimentConfig, data: dict) -> str:
    base = json.loads(cfg.to_json())
    base.update(data)
    return json.dumps(base)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run_suite(cfg)
    except (StokesTraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    s = report.summary()
    print(f"{cfg.suite}: {s['passed']}/{s['records']} records passed, max deviation {s['max_deviation']:.3e}")
    if not report.passed:
        f = s["first_failure"]
        print(f"first failure: seed={f['seed']} case={f['case']} check={f['check']}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
