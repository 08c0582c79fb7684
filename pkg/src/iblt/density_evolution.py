"""Density evolution for peeling recovery and the load-threshold search.

Messages start as erasures (q0 = p0 = 1) and are updated as

    p_l = 1 - rho(1 - q_{l-1})
    q_l = lambda(p_l)

with the Poisson-limit ``rho(x) = exp(-eta * Lambda'(1) * (1 - x))``. Recovery
succeeds in the limit iff ``q > lambda(1 - exp(-eta * Lambda'(1) * q))`` for
every q in (0, 1]; the load threshold is the largest eta satisfying it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .degree_dist import (
    CellDistribution,
    DegreeDistribution,
    EdgeDistribution,
    asymptotic_rho,
    avg_degree,
    edge_poly_array,
    eval_edge_poly,
    to_edge_perspective,
)
from .errors import BracketFailure, DomainError, NonPositiveLoad, UndefinedThreshold

DEFAULT_GRID = 10_000
DEFAULT_TOL = 1e-4
INITIAL_BRACKET = (0.0, 1.2)
MAX_BRACKET = 8.0


@dataclass(frozen=True)
class DEParams:
    dist: DegreeDistribution
    eta: float
    max_iters: int = 100_000
    convergence_eps: float = 1e-12
    grid_points: int = DEFAULT_GRID

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if not self.convergence_eps > 0:
            raise DomainError("convergence_eps must be positive")
        if self.grid_points < 2:
            raise DomainError("grid_points must be >= 2")
        if not self.eta > 0:
            raise NonPositiveLoad(f"load must be positive, got {self.eta}")


@dataclass
class DETrace:
    q_sequence: list[float] = field(default_factory=list)
    p_sequence: list[float] = field(default_factory=list)
    converged_to_zero: bool = False
    iterations_used: int = 0


@dataclass(frozen=True)
class ThresholdReport:
    eta_star: float
    bracket: tuple[float, float]
    bisection_steps: int
    tolerance: float

    def to_json_obj(self) -> dict:
        return {
            "eta_star": self.eta_star,
            "bracket": list(self.bracket),
            "bisection_steps": self.bisection_steps,
            "tolerance": self.tolerance,
        }


def _clip(v: float) -> float:
    return min(1.0, max(0.0, v))


def de_step(edist: EdgeDistribution, rho: CellDistribution, q_prev: float) -> tuple[float, float]:
    """One density-evolution iteration; returns (p, q)."""
    if not 0.0 <= q_prev <= 1.0:
        raise DomainError(f"q_prev={q_prev} outside [0, 1]")
    p = _clip(1.0 - float(rho.rho(1.0 - q_prev)))
    q = _clip(eval_edge_poly(edist, p))
    return p, q


def de_converge(params: DEParams) -> DETrace:
    """Iterate from all-erasure messages until q vanishes or stalls.

    Stalling is judged relative to q (|dq| < eps * q) so a geometric decay
    towards zero is never mistaken for a nonzero fixed point.
    """
    edist = to_edge_perspective(params.dist)
    rho = asymptotic_rho(params.dist, params.eta)
    eps = params.convergence_eps
    trace = DETrace(q_sequence=[1.0], p_sequence=[1.0])
    q = 1.0
    for it in range(1, params.max_iters + 1):
        p, q_new = de_step(edist, rho, q)
        trace.p_sequence.append(p)
        trace.q_sequence.append(q_new)
        trace.iterations_used = it
        stalled = abs(q - q_new) < eps * q_new
        q = q_new
        if q < eps or stalled:
            break
    trace.converged_to_zero = q < eps
    return trace


def _stable_at_zero(dist: DegreeDistribution, eta: float) -> bool:
    # Near q = 0 the condition reads 1 > lambda_2 * eta * Lambda'(1) = 2 * Lambda_2 * eta.
    return 2.0 * dist.prob(2) * eta < 1.0


def check_success(dist: DegreeDistribution, eta: float, grid_points: int = DEFAULT_GRID) -> bool:
    """True iff q > lambda(1 - exp(-eta Lambda'(1) q)) at every q = k / grid_points."""
    if not eta > 0:
        raise NonPositiveLoad(f"load must be positive, got {eta}")
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    if dist.min_degree == 1:
        return False
    if not _stable_at_zero(dist, eta):
        return False
    q = np.arange(1, grid_points + 1, dtype=float) / grid_points
    p = -np.expm1(-eta * avg_degree(dist) * q)
    return bool(np.all(q > edge_poly_array(to_edge_perspective(dist), p)))


def find_threshold(
    dist: DegreeDistribution,
    tolerance: float = DEFAULT_TOL,
    grid_points: int = DEFAULT_GRID,
) -> ThresholdReport:
    """Bisect for the largest load passing check_success.

    The upper bracket end starts at 1.2 and doubles while it still succeeds,
    up to 8.0.
    """
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    if dist.min_degree == 1:
        raise UndefinedThreshold("degree-1 mass leaves no zero fixed point")
    lo, hi = INITIAL_BRACKET
    while check_success(dist, hi, grid_points):
        if hi >= MAX_BRACKET:
            raise BracketFailure(f"still decodable at load {hi}")
        lo, hi = hi, min(2.0 * hi, MAX_BRACKET)
    steps = 0
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if check_success(dist, mid, grid_points):
            lo = mid
        else:
            hi = mid
        steps += 1
    return ThresholdReport(0.5 * (lo + hi), (lo, hi), steps, tolerance)


def min_gap(dist: DegreeDistribution, eta: float, grid_points: int = DEFAULT_GRID) -> float:
    """min over the grid of q - lambda(1 - exp(-eta Lambda'(1) q)); positive iff decodable."""
    q = np.arange(1, grid_points + 1, dtype=float) / grid_points
    p = -np.expm1(-eta * avg_degree(dist) * q)
    return float(np.min(q - edge_poly_array(to_edge_perspective(dist), p)))


def trace_rows(trace: DETrace):
    for i, (p, q) in enumerate(zip(trace.p_sequence, trace.q_sequence)):
        yield i, p, q

