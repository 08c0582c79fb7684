"""Data-node degree distributions and the cell-node distributions they induce.

A distribution is stored sparsely as ascending ``(degree, probability)`` pairs.
Node-perspective polynomial: ``Lambda(x) = sum_d Lambda_d x^d``.
Edge-perspective polynomial: ``lambda(x) = sum_d lambda_d x^(d-1)`` with
``lambda_d = d Lambda_d / Lambda'(1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy.special import gammaln

from .errors import (
    DegreeOutOfRange,
    DomainError,
    DuplicateDegree,
    FormatError,
    NegativeProbability,
    NonPositiveDegree,
    NonPositiveLoad,
    NonUnitMass,
)

MAX_DEGREE = 1 << 16
INPUT_MASS_TOL = 1e-9


@dataclass(frozen=True)
class DegreeDistribution:
    degrees: tuple[int, ...]
    probs: tuple[float, ...]

    @property
    def max_degree(self) -> int:
        return self.degrees[-1]

    @property
    def min_degree(self) -> int:
        return self.degrees[0]

    def prob(self, degree: int) -> float:
        try:
            return self.probs[self.degrees.index(degree)]
        except ValueError:
            return 0.0

    def terms(self) -> list[tuple[int, float]]:
        return list(zip(self.degrees, self.probs))

    def is_regular(self) -> bool:
        return len(self.degrees) == 1

    def __str__(self) -> str:
        return " + ".join(
            f"x^{d}" if p == 1.0 else f"{p:.6g}x^{d}" for d, p in self.terms()
        )


@dataclass(frozen=True)
class EdgeDistribution:
    degrees: tuple[int, ...]
    probs: tuple[float, ...]


@dataclass(frozen=True)
class CellDistribution:
    """Cell-node degree distribution, either finite binomial or its Poisson limit.

    ``avg_degree`` is Psi'(1), the mean number of pairs per cell.
    """

    avg_degree: float
    avg_data_degree: float
    n: Optional[int] = None
    m: Optional[int] = None
    eta: Optional[float] = None

    @property
    def asymptotic(self) -> bool:
        return self.n is None

    @property
    def edge_prob(self) -> float:
        """Probability that a given pair is connected to a given cell (finite mode)."""
        if self.asymptotic:
            raise DomainError("edge probability is undefined in asymptotic mode")
        return self.avg_degree / self.n

    def rho(self, x):
        """Edge-perspective cell polynomial rho(x) = Psi'(x) / Psi'(1); accepts arrays."""
        x = np.asarray(x, dtype=float)
        if self.asymptotic:
            return np.exp(-self.avg_degree * (1.0 - x))
        return (1.0 - self.edge_prob * (1.0 - x)) ** (self.n - 1)

    def psi_pmf(self, max_degree: Optional[int] = None) -> np.ndarray:
        """Node-perspective mass Psi_d for d = 0..max_degree.

        Finite mode truncates at n by default; asymptotic mode requires an explicit cutoff.
        """
        if max_degree is None:
            if self.asymptotic:
                raise DomainError("asymptotic Psi needs an explicit max_degree")
            max_degree = self.n
        d = np.arange(max_degree + 1, dtype=float)
        if self.asymptotic:
            mu = self.avg_degree
            return np.exp(d * math.log(mu) - mu - gammaln(d + 1)) if mu > 0 else (d == 0).astype(float)
        n, p = self.n, self.edge_prob
        out = np.zeros(max_degree + 1)
        k = d[d <= n]
        if p >= 1.0:
            out[n] = 1.0 if n <= max_degree else 0.0
            return out
        if p <= 0.0:
            out[0] = 1.0
            return out
        logpmf = (
            gammaln(n + 1)
            - gammaln(k + 1)
            - gammaln(n - k + 1)
            + k * math.log(p)
            + (n - k) * math.log1p(-p)
        )
        out[: len(k)] = np.exp(logpmf)
        return out


def validate(raw: Iterable[tuple[int, float]]) -> DegreeDistribution:
    """Build a DegreeDistribution from ``(degree, probability)`` pairs.

    Zero-probability entries are dropped; mass within 1e-9 of one is renormalized.
    """
    raw = list(raw)
    if not raw:
        raise NonUnitMass("empty degree distribution")
    seen: dict[int, float] = {}
    for degree, prob in raw:
        if isinstance(degree, bool) or int(degree) != degree:
            raise NonPositiveDegree(f"degree {degree!r} is not an integer")
        degree = int(degree)
        prob = float(prob)
        if degree < 1:
            raise NonPositiveDegree(f"degree {degree} < 1")
        if degree > MAX_DEGREE:
            raise DegreeOutOfRange(f"degree {degree} exceeds cap {MAX_DEGREE}")
        if degree in seen:
            raise DuplicateDegree(f"degree {degree} listed twice")
        if not math.isfinite(prob) or prob < 0.0:
            raise NegativeProbability(f"probability {prob} for degree {degree}")
        seen[degree] = prob
    total = math.fsum(seen.values())
    if abs(total - 1.0) > INPUT_MASS_TOL:
        raise NonUnitMass(f"probabilities sum to {total!r}")
    degrees = tuple(sorted(d for d, p in seen.items() if p > 0.0))
    probs = tuple(seen[d] / total for d in degrees)
    return DegreeDistribution(degrees, probs)


def regular(degree: int) -> DegreeDistribution:
    return validate([(degree, 1.0)])


def avg_degree(dist: DegreeDistribution) -> float:
    """Lambda'(1), the mean data-node degree."""
    return math.fsum(d * p for d, p in dist.terms())


def _check_unit(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside [0, 1]")


def eval_node_poly(dist: DegreeDistribution, x: float) -> float:
    _check_unit(x)
    return math.fsum(p * x**d for d, p in dist.terms())


def to_edge_perspective(dist: DegreeDistribution) -> EdgeDistribution:
    mean = avg_degree(dist)
    return EdgeDistribution(dist.degrees, tuple(d * p / mean for d, p in dist.terms()))


def eval_edge_poly(edist: EdgeDistribution, x: float) -> float:
    _check_unit(x)
    return math.fsum(p * x ** (d - 1) for d, p in zip(edist.degrees, edist.probs))


def edge_poly_array(edist: EdgeDistribution, x: np.ndarray) -> np.ndarray:
    """Vectorized lambda(x) for the density-evolution grid scans; no domain check."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for d, p in zip(edist.degrees, edist.probs):
        out += p * x ** (d - 1)
    return out


def induced_cell_distribution(dist: DegreeDistribution, n: int, m: int) -> CellDistribution:
    if n < 1 or m < 1:
        raise DomainError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    mean = avg_degree(dist)
    return CellDistribution(avg_degree=n * mean / m, avg_data_degree=mean, n=n, m=m)


def asymptotic_rho(dist: DegreeDistribution, eta: float) -> CellDistribution:
    if not eta > 0:
        raise NonPositiveLoad(f"load must be positive, got {eta}")
    mean = avg_degree(dist)
    return CellDistribution(avg_degree=eta * mean, avg_data_degree=mean, eta=eta)


# JSON format: {"terms": [{"degree": 3, "prob": 1.0}, ...]}


def to_json_obj(dist: DegreeDistribution) -> dict:
    return {"terms": [{"degree": d, "prob": p} for d, p in dist.terms()]}


def from_json_obj(obj) -> DegreeDistribution:
    try:
        terms = obj["terms"]
        raw = [(t["degree"], t["prob"]) for t in terms]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed distribution JSON: {exc!r}") from exc
    return validate(raw)


def load(path) -> DegreeDistribution:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return from_json_obj(obj)


def dump(dist: DegreeDistribution, path, **extra) -> None:
    obj = to_json_obj(dist)
    obj.update(extra)
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


# Distributions from the load-threshold table, with their published thresholds.
TABLE1 = {
    "x3": ([(3, 1.0)], 0.818),
    "x4": ([(4, 1.0)], 0.772),
    "mixed_3_21": ([(3, 0.887), (21, 0.113)], 0.920),
    "irsa_2_3_8": ([(2, 0.25), (3, 0.6), (8, 0.15)], 0.892),
    "annealed_2_3_18": ([(2, 0.15), (3, 0.725), (18, 0.125)], 0.934),
}


def table1() -> dict[str, tuple[DegreeDistribution, float]]:
    return {name: (validate(terms), eta) for name, (terms, eta) in TABLE1.items()}
