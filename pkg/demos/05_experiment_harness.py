"""Run every bundled experiment config through the command line entry point.

Run: python demos/05_experiment_harness.py [output-root]
Reports land in <output-root>/<config-name>/{report.json,records.csv}.
"""
import sys
from pathlib import Path

from qbinclass.harness.cli import main

here = Path(__file__).parent
root = Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
for cfg in sorted((here / "configs").glob("*.yaml")):
    print(f"== {cfg.stem}")
    status = main(["run", str(cfg), "--out", str(root / cfg.stem)])
    if status:
        sys.exit(status)
