#!/usr/bin/env python3
"""Profile the sup-norm error of the four-order risk expansion along a
floor schedule, at a chosen truncation order and variant.

Variant "reduced" keeps beyond order two only the boundary-dominant
inverse-theta power of each order; its N^2-scaled residual should fall on
schedules with decay well inside r < 3/4 (try --r 0.6).

Example:
    python scripts/expansion_residual_sweep.py --N 256,1024,4096 --r 0.6 --variant reduced
"""

import argparse
import sys

from minimax_multinom.cli import main as cli_main


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--N", default="64,256,1024")
    ap.add_argument("--alpha", type=float, default=None,
                    help="symmetric concentration (default: minimax prior)")
    ap.add_argument("--r", type=float, default=0.6)
    ap.add_argument("--order", type=int, default=4, choices=[1, 2, 3, 4])
    ap.add_argument("--variant", default="full", choices=["full", "reduced"])
    ap.add_argument("--grid-size", type=int, default=128)
    ap.add_argument("--seed", type=int, default=0x5EED)
    ap.add_argument("--out", default="-")
    return ap.parse_args()


def main():
    args = parse_args()
    argv = [
        "expansion-error",
        "--k", str(args.k),
        "--N", args.N,
        "--r", str(args.r),
        "--order", str(args.order),
        "--variant", args.variant,
        "--grid-size", str(args.grid_size),
        "--seed", str(args.seed),
        "--out", args.out,
    ]
    if args.alpha is None:
        argv += ["--prior", "minimax"]
    else:
        argv += ["--alpha", str(args.alpha)]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
