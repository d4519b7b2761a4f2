#!/usr/bin/env python3
"""Run the critical-weight experiments through the CLI into one output directory."""

import argparse
import math
import sys

from conestokes.cli import run

HALF = repr(math.pi / 2)
WIDE = repr(2 * math.pi / 3)

RUNS = {
    "l6b": ["sharpness", "l6b", "--theta0", HALF, "--eps", "2^-4..2^-12"],
    "l6a": ["sharpness", "l6a", "--theta0", HALF, "--N", "2^3..2^10"],
    "l12c": ["sharpness", "l12c", "--theta0", WIDE],
    "l12a": ["sharpness", "l12a", "--theta0", WIDE],
    "scaling": ["sharpness", "scaling", "--s", "16j"],
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="sharpness_out")
    ap.add_argument("--workers", default="1")
    ap.add_argument("only", nargs="*", help=f"subset of {', '.join(RUNS)} (default: all)")
    ns = ap.parse_args()
    unknown = set(ns.only) - set(RUNS)
    if unknown:
        ap.error(f"unknown experiments: {', '.join(sorted(unknown))}")
    worst = 0
    for name in ns.only or RUNS:
        print(f"== {name}", flush=True)
        worst = max(worst, run([*RUNS[name], "--outdir", ns.outdir, "--workers", ns.workers]))
    return worst


if __name__ == "__main__":
    sys.exit(main())
