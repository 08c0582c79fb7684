"""Monte Carlo sweep of pair error rate versus load for the reference distributions.

Writes CSV (one row per distribution and load) to --out or stdout.
"""

import argparse
import sys

from iblt import degree_dist as dd
from iblt.montecarlo import eta_grid, sweep_configs, sweep_load


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--eta-from", type=float, default=0.70)
    ap.add_argument("--eta-to", type=float, default=0.96)
    ap.add_argument("--eta-step", type=float, default=0.02)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    dists = {name: dist for name, (dist, _) in dd.table1().items()}
    configs = sweep_configs(dists, args.m, eta_grid(args.eta_from, args.eta_to, args.eta_step), args.trials, args.seed)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            sweep_load(configs, fh, workers=args.workers)
    else:
        sweep_load(configs, sys.stdout, workers=args.workers)


if __name__ == "__main__":
    main()
