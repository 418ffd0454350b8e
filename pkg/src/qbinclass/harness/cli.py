"""Command line entry point.

    qbinclass run <config> [--seed S] [--out DIR] [--mode MODE]
    qbinclass validate <config>
    qbinclass oracle-check <oracle-file> --n N

Exit status: 0 success, 2 config/oracle validation failure, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..qpe_fidelity import Mode
from .config import ConfigError, load_config
from .experiments import run_experiment
from .oracle_spec import parse_oracle_spec

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbinclass",
                                description="Quantum binary-classifier experiments")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="report directory (overrides config output)")
    run.add_argument("--mode", choices=[m.value for m in Mode])

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")

    oc = sub.add_parser("oracle-check", help="parse an oracle spec and print its label set")
    oc.add_argument("oracle")
    oc.add_argument("--n", type=int, required=True)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "oracle-check":
            oracle = parse_oracle_spec(Path(args.oracle).read_text(), args.n)
            print(json.dumps({"n": oracle.n, "N": oracle.N, "M": oracle.M,
                              "label_one": oracle.marked.tolist(),
                              "degenerate": oracle.M in (0, oracle.N)}))
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "validate":
            print(json.dumps(cfg.to_dict(), indent=2))
            return EXIT_OK
        out = str(Path(args.out).resolve()) if args.out else None
        cfg = cfg.with_overrides(seed=args.seed, output=out, mode=args.mode)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        report = run_experiment(cfg)
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(json.dumps({"experiment": report.experiment, "summary": report.summary},
                     default=str, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
