"""Invariant checks run by ``liebridge run --validate-only``."""

from dataclasses import dataclass

import numpy as np

from .geometry import Group
from .hilbert import contraction_ratios, hilbert_distance, pointwise_ratio, random_positive_pairs
from .sinkhorn import BridgeProblem


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34s} value={self.value:.3e}  threshold={self.threshold:.1e}"


def semigroup_law_error(problem: BridgeProblem, s: float, t: float, f=None) -> float:
    grid = problem.grid
    if f is None:
        f = 1.0 + 0.5 * np.cos(grid.nodes) + 0.25 * np.sin(3 * grid.nodes) ** 2
    two_hop = problem.operator(t).apply(problem.operator(s).apply(f))
    direct = problem.operator(s + t).apply(f)
    return float(np.max(np.abs(two_hop - direct)) / np.max(np.abs(direct)))


def run_checks(problem: BridgeProblem, seed: int = 0):
    rng = np.random.default_rng(seed)
    grid = problem.grid
    n = grid.size
    periodic = grid.group is Group.SO2
    checks = []

    tol_sg = 1e-6 if periodic else 1e-5
    err = semigroup_law_error(problem, 0.3, 0.7)
    checks.append(Check("semigroup law T0.3 T0.7 = T1", err, tol_sg, err < tol_sg))

    stoch = max(float(np.max(np.abs(problem.operator(t).apply(np.ones(n)) - 1.0))) for t in (0.1, 0.5, 1.0))
    checks.append(Check("stochasticity T_t 1 = 1", stoch, 1e-8, stoch < 1e-8))

    iso = 0.0
    scale = 0.0
    for _ in range(50):
        lf, g1, g2 = rng.normal(size=(3, n))
        iso = max(iso, abs(hilbert_distance(pointwise_ratio(lf, g1), pointwise_ratio(lf, g2))
                           - hilbert_distance(g1, g2)))
        lam, mu = np.log(rng.uniform(1e-3, 1e3, 2))
        scale = max(scale, abs(hilbert_distance(g1 + lam, g2 + mu) - hilbert_distance(g1, g2)))
    checks.append(Check("ratio map isometry in d_H", iso, 1e-12, iso < 1e-12))
    checks.append(Check("d_H scale invariance", scale, 1e-12, scale < 1e-12))

    pairs = random_positive_pairs(n, 100, rng, periodic=periodic)
    c = float(np.max(contraction_ratios(problem.operator(1.0), pairs)))
    checks.append(Check("T1 contraction in d_H (max ratio)", c, 1.0, c < 1.0))
    return checks
