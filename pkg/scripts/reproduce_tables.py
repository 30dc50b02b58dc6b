#!/usr/bin/env python3
"""Reproduce the coverage/length comparison tables.

Runs the full method grid (two cheap bootstrap variants at several replicate
counts, plus the plug-in, batch-means, weighted-bootstrap, and tree-split
baselines) over three covariance families and writes one CSV per problem.

Desk scale (default) finishes on a laptop; --full switches to the
full-scale grid (n=1e5, 500 trials, d up to 200) and takes hours.

Usage:
    python scripts/reproduce_tables.py --outdir results/
    python scripts/reproduce_tables.py --problem linear --full --workers 8
"""

import argparse
import pathlib
import sys

from cheapboot.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--problem", choices=("linear", "logistic", "both"),
                        default="both")
    parser.add_argument("--full", action="store_true",
                        help="full scale instead of desk scale")
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    problems = ("linear", "logistic") if args.problem == "both" else (args.problem,)
    for problem in problems:
        out = outdir / f"table_{problem}{'_full' if args.full else ''}.csv"
        argv = [
            "table", "--problem", problem, "--seed", str(args.seed),
            "--workers", str(args.workers), "--out", str(out),
        ]
        if args.full:
            argv.append("--full")
        if args.trials is not None:
            argv += ["--trials", str(args.trials)]
        rc = cli_main(argv)
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
