#!/usr/bin/env python3
"""Coverage/length sensitivity of one cell across initial step sizes.

Thin wrapper over `cheapboot sweep`: fixes everything about a cell except
eta and reports coverage and mean length at each grid point. Used once to
choose the pinned per-cell defaults; rerun it when adding a new cell.

Usage:
    python scripts/sweep_eta.py --method conb --problem linear --d 5
    python scripts/sweep_eta.py --method cofb_asgd --B 10 \
        --eta-grid 0.2,0.35,0.5,0.65 --out sweep.csv
"""

import sys

from cheapboot.cli import main as cli_main


if __name__ == "__main__":
    sys.exit(cli_main(["sweep"] + sys.argv[1:]))
