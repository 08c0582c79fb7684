"""Command-line entry point.

Every run writes its fully resolved configuration as one JSON line on stderr
(``{"config": {...}}``); results go to stdout or to ``--out``.
Exit codes: 0 success, 1 domain error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import degree_dist as dd
from .annealer import AnnealConfig, default_init, optimize_chains
from .density_evolution import DEParams, de_converge, find_threshold, trace_rows
from .errors import IbltError, ValueLengthMismatch
from .montecarlo import SimConfig, estimate_pe, eta_grid, pairs_for_load, sweep_configs, sweep_load
from .reconcile import recover_diff, subtract
from .table import FORMAT_VERSION, Iblt, KeyValuePair

DIST_FORMAT_VERSION = 1


def _emit_config(args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    print(json.dumps({"config": cfg}, default=str, sort_keys=True), file=sys.stderr)


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_threshold(args) -> None:
    report = find_threshold(dd.load(args.dist), args.tol, args.grid)
    _write(json.dumps(report.to_json_obj()) + "\n", args.out)


def cmd_de_trace(args) -> None:
    params = DEParams(dd.load(args.dist), args.eta, max_iters=args.max_iters, convergence_eps=args.eps)
    trace = de_converge(params)
    lines = ["iter,p,q"] + [f"{i},{p!r},{q!r}" for i, p, q in trace_rows(trace)]
    _write("\n".join(lines) + "\n", args.out)


def cmd_simulate(args) -> None:
    config = SimConfig(
        dd.load(args.dist),
        args.m,
        (args.eta,),
        args.trials,
        args.seed,
        stop_at_errors=args.stop_at_errors,
        keys_only=args.keys_only,
    )
    pt = estimate_pe(config, workers=args.workers).points[0]
    obj = {
        "eta": pt.eta,
        "n": pt.n,
        "trials": pt.trials,
        "failed_pairs": pt.failed_pairs,
        "total_pairs": pt.total_pairs,
        "pe": pt.pe_estimate,
        "ci_lo": pt.wilson_ci_95[0],
        "ci_hi": pt.wilson_ci_95[1],
        "failed_tables": pt.failed_tables,
    }
    _write(json.dumps(obj) + "\n", args.out)


def cmd_sweep(args) -> None:
    files = sorted(Path(args.dists).glob("*.json"))
    if not files:
        raise FileNotFoundError(f"no *.json distributions in {args.dists}")
    dists = {f.stem: dd.load(f) for f in files}
    etas = eta_grid(args.eta_from, args.eta_to, args.eta_step)
    configs = sweep_configs(dists, args.m, etas, args.trials, args.seed, keys_only=args.keys_only)
    _write(sweep_load(configs, workers=args.workers), args.out)


def cmd_optimize(args) -> None:
    degrees = frozenset(int(d) for d in args.degrees.split(","))
    init = default_init(degrees, args.max_l2)
    config = AnnealConfig(
        degrees,
        init,
        max_lambda2=args.max_l2,
        steps=args.steps,
        temp_initial=args.t0,
        temp_final=args.tf,
        move_scale=args.move_scale,
        rng_seed=args.seed,
        threshold_tol=args.tol,
    )
    best = optimize_chains(config, [args.seed + k for k in range(args.chains)])
    obj = dd.to_json_obj(best.dist)
    obj["threshold"] = best.threshold
    _write(json.dumps(obj, indent=2) + "\n", args.out)


def _read_values(path) -> list[bytes]:
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(bytes.fromhex(line))
        except ValueError as exc:
            raise ValueLengthMismatch(f"{path}:{lineno}: not hex") from exc
    return values


def cmd_encode(args) -> None:
    values = _read_values(args.values)
    kappa = args.kappa if args.kappa is not None else 8 * (len(values[0]) if values else 16)
    table = Iblt(args.m, dd.load(args.dist), args.seed, args.nu, kappa)
    for v in values:
        table.insert(KeyValuePair.from_value(v, args.nu))
    table.save(args.out)
    print(json.dumps({"encoded": len(values), "m": args.m, "load": len(values) / args.m}))


def cmd_recover(args) -> None:
    outcome = Iblt.load(args.table).recover()
    text = "".join(z.value.hex() + "\n" for z in outcome.recovered)
    if args.out:
        Path(args.out).write_text(text)
    summary = {
        "recovered": len(outcome.recovered),
        "complete": outcome.complete,
        "residual_cells_nonzero": outcome.residual_cells_nonzero,
    }
    print(json.dumps(summary))
    if not args.out:
        sys.stdout.write(text)


def cmd_reconcile(args) -> None:
    diff = recover_diff(subtract(Iblt.load(args.table_a), Iblt.load(args.table_b)))
    obj = {
        "only_in_a": [z.value.hex() for z in diff.only_in_a],
        "only_in_b": [z.value.hex() for z in diff.only_in_b],
        "complete": diff.complete,
    }
    _write(json.dumps(obj, indent=2) + "\n", args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iblt", description="Irregular IBLT toolkit")
    parser.add_argument(
        "--version",
        action="version",
        version=f"iblt {__version__} (table format v{FORMAT_VERSION}, distribution format v{DIST_FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="density-evolution load threshold")
    p.add_argument("--dist", required=True)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("de-trace", help="density-evolution trajectory as CSV")
    p.add_argument("--dist", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=cmd_de_trace)

    p = sub.add_parser("simulate", help="Monte Carlo P_e at one load")
    p.add_argument("--dist", required=True)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--stop-at-errors", type=int)
    p.add_argument("--keys-only", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Monte Carlo P_e curves for every distribution in a directory")
    p.add_argument("--dists", required=True)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--eta-from", type=float, default=0.70)
    p.add_argument("--eta-to", type=float, default=0.96)
    p.add_argument("--eta-step", type=float, default=0.02)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--keys-only", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="simulated-annealing search for a degree distribution")
    p.add_argument("--degrees", required=True, help="comma-separated allowed degrees, e.g. 2,3,18")
    p.add_argument("--max-l2", type=float, default=0.15)
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--t0", type=float, default=0.02)
    p.add_argument("--tf", type=float, default=1e-4)
    p.add_argument("--move-scale", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("encode", help="build a table from newline-delimited hex values")
    p.add_argument("--values", required=True)
    p.add_argument("--dist", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nu", type=int, default=64)
    p.add_argument("--kappa", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("recover", help="peel a table file back into hex values")
    p.add_argument("--table", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("reconcile", help="symmetric difference of two table files")
    p.add_argument("--table-a", required=True)
    p.add_argument("--table-b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reconcile)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _emit_config(args)
    try:
        args.func(args)
    except IbltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
