"""Finite-length Monte Carlo estimates of the per-pair failure probability P_e."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np
from scipy.stats import binomtest

from .degree_dist import DegreeDistribution
from .errors import DomainError
from .table import Iblt, KeyValuePair

CSV_HEADER = ["dist_id", "eta", "n", "trials", "failed_pairs", "total_pairs", "pe", "ci_lo", "ci_hi", "failed_tables"]


@dataclass(frozen=True)
class SimConfig:
    dist: DegreeDistribution
    m: int
    eta_values: tuple[float, ...]
    trials_per_point: int
    master_seed: int = 7
    stop_at_errors: Optional[int] = None
    keys_only: bool = False
    kappa: int = 128

    def __post_init__(self):
        object.__setattr__(self, "eta_values", tuple(float(e) for e in self.eta_values))
        if self.trials_per_point < 1:
            raise DomainError("trials_per_point must be >= 1")
        if self.m < 1:
            raise DomainError("m must be >= 1")
        for eta in self.eta_values:
            if not eta > 0 or pairs_for_load(eta, self.m) < 1:
                raise DomainError(f"load {eta} gives no pairs at m={self.m}")


@dataclass(frozen=True)
class SimPoint:
    eta: float
    n: int
    trials: int
    failed_pairs: int
    total_pairs: int
    failed_tables: int
    pe_estimate: float
    wilson_ci_95: tuple[float, float]

    @property
    def table_failure_rate(self) -> float:
        return self.failed_tables / self.trials


@dataclass
class SimResult:
    points: list[SimPoint] = field(default_factory=list)


def pairs_for_load(eta: float, m: int) -> int:
    return int(round(eta * m))


def trial_seed(master_seed: int, point: int, trial: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(point, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def wilson_interval(failures: int, total: int, confidence: float = 0.95) -> tuple[float, float]:
    if total == 0:
        return (0.0, 1.0)
    ci = binomtest(failures, total).proportion_ci(confidence_level=confidence, method="wilson")
    return (float(ci.low), float(ci.high))


def build_trial(
    dist: DegreeDistribution,
    m: int,
    n: int,
    seed: int,
    keys_only: bool = False,
    kappa: int = 128,
) -> tuple[Iblt, list[KeyValuePair]]:
    """Fresh table with hash seed ``seed`` and n random pairs drawn from the same seed (not yet inserted)."""
    if n < 1:
        raise DomainError("need at least one pair")
    rng = np.random.default_rng(seed)
    if keys_only:
        table = Iblt(m, dist, hash_seed=seed, kappa=0)
        keys = rng.integers(0, 1 << 64, size=n, dtype=np.uint64, endpoint=False)
        return table, [KeyValuePair(int(k), b"") for k in keys]
    table = Iblt(m, dist, hash_seed=seed, kappa=kappa)
    width = table.value_nbytes
    raw = rng.bytes(width * n)
    return table, [KeyValuePair.from_value(raw[i * width : (i + 1) * width]) for i in range(n)]


def run_trial(
    dist: DegreeDistribution,
    m: int,
    n: int,
    seed: int,
    keys_only: bool = False,
    kappa: int = 128,
) -> int:
    """Insert n random pairs into a fresh table, recover, return how many are missing."""
    table, pairs = build_trial(dist, m, n, seed, keys_only, kappa)
    table.insert_all(pairs)
    return n - len(table.recover().recovered)


def _point(config: SimConfig, index: int, eta: float, pool=None) -> SimPoint:
    n = pairs_for_load(eta, config.m)
    seeds = [trial_seed(config.master_seed, index, t) for t in range(config.trials_per_point)]
    work = partial(run_trial, config.dist, config.m, n, keys_only=config.keys_only, kappa=config.kappa)
    failures = pool.map(work, seeds, chunksize=16) if pool else map(work, seeds)
    trials = failed = failed_tables = 0
    for f in failures:
        trials += 1
        failed += f
        failed_tables += f > 0
        if config.stop_at_errors is not None and failed >= config.stop_at_errors:
            break
    total = trials * n
    return SimPoint(eta, n, trials, failed, total, failed_tables, failed / total, wilson_interval(failed, total))


def estimate_pe(config: SimConfig, workers: int = 1) -> SimResult:
    """P_e at each load; trial seeds depend only on (master_seed, point index, trial index)."""
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            points = [_point(config, i, eta, pool) for i, eta in enumerate(config.eta_values)]
    else:
        points = [_point(config, i, eta) for i, eta in enumerate(config.eta_values)]
    return SimResult(points)


def eta_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded to 10 decimals so CSV output is stable."""
    if step <= 0:
        raise DomainError("step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(max(count, 0))]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(rows: Iterable[tuple[str, SimPoint]], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for dist_id, pt in rows:
        writer.writerow(
            [
                dist_id,
                _fmt(pt.eta),
                pt.n,
                pt.trials,
                pt.failed_pairs,
                pt.total_pairs,
                _fmt(pt.pe_estimate),
                _fmt(pt.wilson_ci_95[0]),
                _fmt(pt.wilson_ci_95[1]),
                pt.failed_tables,
            ]
        )


def sweep_load(configs: dict[str, SimConfig], out: Optional[TextIO] = None, workers: int = 1) -> str:
    """Run every configuration and emit CSV rows sorted by dist_id, then load."""
    rows: list[tuple[str, SimPoint]] = []
    for dist_id in sorted(configs):
        result = estimate_pe(configs[dist_id], workers=workers)
        rows.extend((dist_id, pt) for pt in sorted(result.points, key=lambda p: p.eta))
    buf = io.StringIO()
    write_csv(rows, buf)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def sweep_configs(
    dists: dict[str, DegreeDistribution],
    m: int,
    etas: Sequence[float],
    trials: int,
    master_seed: int,
    **kwargs,
) -> dict[str, SimConfig]:
    return {
        name: SimConfig(dist, m, tuple(etas), trials, master_seed, **kwargs) for name, dist in dists.items()
    }
