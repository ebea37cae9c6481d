"""Command-line experiment runner.

Usage: pnofdm <subcommand> --config <file> --out <dir> [--seed S] [--threads K]

Subcommands: nmse-pnac, nmse-ifc, ber, throughput, overhead, calibrate, all.
Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

import argparse
import dataclasses
import os
import sys
import time

from .config import ConfigError, load_config
from .engine import NumericalFailure
from .runs import EXPERIMENTS, run_experiment

SUBCOMMANDS = ("nmse-pnac", "nmse-ifc", "ber", "throughput", "overhead",
               "calibrate", "all")
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnofdm",
        description="Link-level OFDM phase-noise compensation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment(s)")
        p.add_argument("--config", required=True, help="JSON scenario config")
        p.add_argument("--out", required=True, help="output directory for CSVs")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker processes for trial-level parallelism")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except ConfigError as exc:
        print(f"pnofdm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    names = list(EXPERIMENTS) if args.command == "all" else [args.command]
    os.makedirs(args.out, exist_ok=True)
    try:
        for name in names:
            t0 = time.perf_counter()
            records = run_experiment(name, cfg, args.out, threads=args.threads)
            wall = time.perf_counter() - t0
            print(f"pnofdm: {name}: {len(records)} records in {wall:.1f}s "
                  f"-> {os.path.join(args.out, EXPERIMENTS[name][1])}")
    except NumericalFailure as exc:
        print(f"pnofdm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE
    return 0


if __name__ == "__main__":
    sys.exit(main())
