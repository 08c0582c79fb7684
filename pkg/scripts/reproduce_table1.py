"""Thresholds of the reference distributions, next to their published values."""

import argparse
import time

from iblt import degree_dist as dd
from iblt.density_evolution import find_threshold


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-4)
    ap.add_argument("--grid", type=int, default=10_000)
    args = ap.parse_args()

    print(f"{'distribution':<40} {'eta*':>8} {'published':>10} {'diff':>8} {'secs':>7}")
    for name, (dist, published) in dd.table1().items():
        start = time.perf_counter()
        star = find_threshold(dist, args.tol, args.grid).eta_star
        secs = time.perf_counter() - start
        print(f"{str(dist):<40} {star:8.4f} {published:10.3f} {star - published:+8.4f} {secs:7.3f}")


if __name__ == "__main__":
    main()
