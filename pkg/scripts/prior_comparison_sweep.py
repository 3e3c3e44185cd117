#!/usr/bin/env python3
"""Sweep the sup-risk excess over (k-1)/(2N) for a family of symmetric
priors along a floor schedule, and write the plot-ready CSV.

The minimax concentration 1 + 1/sqrt(6) keeps the N^2-scaled excess
bounded near -(k-1)(1 + (7 + 2 sqrt 6) k)/12, while the Jeffreys prior's
excess diverges like 1/(24 eps_N).

Example:
    python scripts/prior_comparison_sweep.py --k 2 --N 256,1024,4096 --out sweep.csv
"""

import argparse
import sys

from minimax_multinom.cli import main as cli_main


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--N", default="64,256,1024")
    ap.add_argument("--priors", default="jeffreys,uniform,minimax")
    ap.add_argument("--r", type=float, default=0.73)
    ap.add_argument("--grid-size", type=int, default=512)
    ap.add_argument("--seed", type=int, default=0x5EED)
    ap.add_argument("--out", default="-")
    return ap.parse_args()


def main():
    args = parse_args()
    return cli_main([
        "compare-priors",
        "--k", str(args.k),
        "--N", args.N,
        "--priors", args.priors,
        "--r", str(args.r),
        "--grid-size", str(args.grid_size),
        "--seed", str(args.seed),
        "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
