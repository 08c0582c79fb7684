"""Simulated annealing over degree distributions, maximizing the load threshold.

The only constraints are the allowed support and a cap on the degree-2 mass.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .degree_dist import DegreeDistribution, regular, validate
from .density_evolution import DEFAULT_GRID, find_threshold
from .errors import DomainError, MoveFailure

MAX_RETRIES = 100
_DROP = 1e-12


@dataclass(frozen=True)
class AnnealConfig:
    allowed_degrees: frozenset[int]
    init: DegreeDistribution
    max_lambda2: float = 0.15
    steps: int = 5000
    temp_initial: float = 0.02
    temp_final: float = 1e-4
    move_scale: float = 0.1
    rng_seed: int = 7
    threshold_tol: float = 1e-3
    final_tol: float = 1e-4
    grid_points: int = DEFAULT_GRID
    structural_move_prob: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "allowed_degrees", frozenset(int(d) for d in self.allowed_degrees))
        if not self.allowed_degrees or min(self.allowed_degrees) < 2:
            raise DomainError("allowed degrees must be non-empty and >= 2")
        if not self.temp_initial > self.temp_final > 0:
            raise DomainError("need temp_initial > temp_final > 0")
        if not 0.0 <= self.max_lambda2 <= 1.0:
            raise DomainError("max_lambda2 must lie in [0, 1]")
        if self.steps < 0 or self.move_scale < 0:
            raise DomainError("steps and move_scale must be non-negative")
        if not satisfies(self.init, self):
            raise DomainError(f"initial distribution {self.init} violates the constraints")


@dataclass(frozen=True)
class Candidate:
    dist: DegreeDistribution
    threshold: float


def satisfies(dist: DegreeDistribution, config: AnnealConfig) -> bool:
    return set(dist.degrees) <= config.allowed_degrees and dist.prob(2) <= config.max_lambda2 + 1e-15


def default_init(allowed: Iterable[int], max_lambda2: float) -> DegreeDistribution:
    """Regular distribution at the smallest allowed degree that does not need degree-2 mass."""
    allowed = sorted(allowed)
    above2 = [d for d in allowed if d >= 3]
    if above2:
        return regular(above2[0])
    if max_lambda2 >= 1.0:
        return regular(2)
    raise DomainError("only degree 2 allowed but its mass is capped below 1")


def temperature(config: AnnealConfig, step: int) -> float:
    return config.temp_initial * (config.temp_final / config.temp_initial) ** (step / max(config.steps, 1))


def perturb(
    dist: DegreeDistribution,
    temp: float,
    rng: random.Random,
    config: AnnealConfig,
) -> DegreeDistribution:
    """A random feasible neighbour of dist.

    Usually moves a mass delta ~ U(0, move_scale * T / T0) between two support
    degrees; with probability structural_move_prob adds an unused allowed
    degree or drops a support degree instead.
    """
    if config.move_scale == 0:
        return dist
    unused = sorted(config.allowed_degrees - set(dist.degrees))
    if len(dist.degrees) == 1 and not unused:
        return dist
    scale = config.move_scale * temp / config.temp_initial
    for _ in range(MAX_RETRIES):
        mass = dict(dist.terms())
        support = list(dist.degrees)
        structural = rng.random() < config.structural_move_prob or len(support) == 1
        if structural and unused and (len(support) == 1 or rng.random() < 0.5):
            new = rng.choice(unused)
            src = rng.choice(support)
            delta = min(rng.uniform(0, scale), mass[src])
            mass[src] -= delta
            mass[new] = delta
        elif structural and len(support) > 1:
            gone, dst = rng.sample(support, 2)
            mass[dst] += mass.pop(gone)
        else:
            src, dst = rng.sample(support, 2)
            delta = min(rng.uniform(0, scale), mass[src])
            mass[src] -= delta
            mass[dst] += delta
        terms = [(d, p) for d, p in mass.items() if p > _DROP]
        if not terms:
            continue
        total = math.fsum(p for _, p in terms)
        out = validate([(d, p / total) for d, p in terms])
        if satisfies(out, config):
            return out
    raise MoveFailure(f"no feasible neighbour of {dist} after {MAX_RETRIES} tries")


def accept(delta_threshold: float, temp: float, rng: random.Random) -> bool:
    """Metropolis rule for a maximization objective."""
    if not temp > 0:
        raise DomainError("temperature must be positive")
    if delta_threshold >= 0:
        return True
    return rng.random() < math.exp(delta_threshold / temp)


def _threshold(dist: DegreeDistribution, tol: float, grid: int) -> float:
    return find_threshold(dist, tol, grid).eta_star


def optimize(
    config: AnnealConfig,
    on_step: Optional[Callable[[int, Candidate, Candidate], None]] = None,
) -> Candidate:
    """Single annealing chain; returns the best candidate seen, re-scored at final_tol.

    ``on_step(step, current, best)`` is called after every step.
    """
    rng = random.Random(config.rng_seed)
    current = Candidate(config.init, _threshold(config.init, config.threshold_tol, config.grid_points))
    best = current
    for step in range(config.steps):
        temp = temperature(config, step)
        try:
            proposal = perturb(current.dist, temp, rng, config)
        except MoveFailure:
            proposal = current.dist
        if proposal != current.dist:
            score = _threshold(proposal, config.threshold_tol, config.grid_points)
            if accept(score - current.threshold, temp, rng):
                current = Candidate(proposal, score)
                if score > best.threshold:
                    best = current
        if on_step is not None:
            on_step(step, current, best)
    return Candidate(best.dist, _threshold(best.dist, config.final_tol, config.grid_points))


def optimize_chains(config: AnnealConfig, seeds: Iterable[int]) -> Candidate:
    """Independent chains, one per seed; the highest threshold wins (ties go to the earlier seed)."""
    best: Optional[Candidate] = None
    for seed in seeds:
        cand = optimize(AnnealConfig(**{**config.__dict__, "rng_seed": seed}))
        if best is None or cand.threshold > best.threshold:
            best = cand
    if best is None:
        raise DomainError("no seeds given")
    return best
