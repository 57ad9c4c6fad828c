"""Log-domain dynamic Sinkhorn recursion for the Schrodinger system.

The unknowns are the end-point potentials ``phi_1`` and ``phihat_0`` with

    rho_0 = phihat_0 * T_1 phi_1,      rho_1 = phi_1 * T_1 phihat_0.

The fixed-point map ``F(phi) = rho_1 / T_1(rho_0 / T_1 phi)`` is a strict
contraction in Hilbert's projective metric; iterating its sup-normalized
version from any positive start converges linearly.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .geometry import DensityGrid, Group, GroupGrid
from .hilbert import hilbert_distance, normalize_sup
from .semigroup import HeatKernelSO2, HeatKernelSO3, SemigroupOperator, kernel_for, semigroup

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500


class SinkhornBreakdown(FloatingPointError):
    """A Sinkhorn iterate became non-finite (kernel underflow or bad data)."""


@dataclass(frozen=True, eq=False)
class BridgeProblem:
    grid: GroupGrid
    rho0: DensityGrid
    rho1: DensityGrid
    sigma: float
    truncation: Optional[int] = None  # m_max on SO(2), l_max on SO(3)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        for name, rho in (("rho0", self.rho0), ("rho1", self.rho1)):
            if not rho.grid.same_as(self.grid):
                raise ValueError(f"{name} lives on a different grid")
            if not rho.strictly_positive:
                raise ValueError(f"{name} must be strictly positive on the grid")
            if abs(rho.mass - 1.0) > 1e-10:
                raise ValueError(f"{name} has Haar mass {rho.mass!r}, expected 1")

    @property
    def group(self) -> Group:
        return self.grid.group

    @property
    def kernel(self):
        return kernel_for(self.grid.group, self.sigma, self.truncation)

    def operator(self, t: float) -> SemigroupOperator:
        return semigroup(self.grid, self.kernel, t)

    @property
    def log_rho0(self) -> np.ndarray:
        return np.log(self.rho0.values)

    @property
    def log_rho1(self) -> np.ndarray:
        return np.log(self.rho1.values)


@dataclass(frozen=True)
class SchrodingerPotentials:
    log_phi1: np.ndarray
    log_phihat0: np.ndarray


@dataclass
class ConvergenceReport:
    iterations: int
    dH_trace: List[float] = field(default_factory=list)
    contraction_estimate: float = 0.0
    terminal_residual: float = float("nan")
    converged: bool = False
    residual_rho0: float = float("nan")
    residual_rho1: float = float("nan")


def sinkhorn_step(problem: BridgeProblem, log_phi1) -> np.ndarray:
    """One application of the sup-normalized map ``F``, entirely in log domain."""
    T1 = problem.operator(1.0)
    g = _finite_or_raise(problem, np.asarray(log_phi1, dtype=np.float64), "input")
    g = _finite_or_raise(problem, T1.apply(g, "log"), "T_1 phi_1")
    g = _finite_or_raise(problem, T1.apply(problem.log_rho0 - g, "log"), "T_1 phihat_0")
    return normalize_sup(problem.log_rho1 - g)


def _finite_or_raise(problem: BridgeProblem, g: np.ndarray, stage: str) -> np.ndarray:
    if not np.all(np.isfinite(g)):
        bad = int(np.count_nonzero(~np.isfinite(g)))
        raise SinkhornBreakdown(
            f"{bad} non-finite log-potential values at {stage}; sigma={problem.sigma} is "
            "likely outside the range where the heat kernel is representable"
        )
    return g


def marginal_residuals(problem: BridgeProblem, potentials: SchrodingerPotentials):
    """Relative sup-norm residuals of both Schrodinger-system equations."""
    T1 = problem.operator(1.0)
    r0 = np.exp(potentials.log_phihat0 + T1.apply(potentials.log_phi1, "log"))
    r1 = np.exp(potentials.log_phi1 + T1.apply(potentials.log_phihat0, "log"))
    rho0, rho1 = problem.rho0.values, problem.rho1.values
    return (float(np.max(np.abs(r0 - rho0)) / np.max(rho0)),
            float(np.max(np.abs(r1 - rho1)) / np.max(rho1)))


def _contraction_estimate(trace) -> float:
    # geometric mean of successive ratios, skipping the first (transient) step
    tr = np.asarray(trace[1:], dtype=np.float64)
    tr = tr[tr > 0]
    if tr.size < 2:
        return 0.0
    return float(np.exp(np.mean(np.diff(np.log(tr)))))


def solve(problem: BridgeProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
          init=None):
    """Iterate the Sinkhorn map until consecutive iterates are ``tol``-close in d_H.

    ``init`` is an optional log-potential for ``phi_1`` (default: constant).
    Returns ``(SchrodingerPotentials, ConvergenceReport)``; non-convergence is
    reported through ``converged=False`` rather than raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if init is None:
        log_phi = np.zeros(problem.grid.size)
    else:
        log_phi = np.asarray(init, dtype=np.float64)
        if log_phi.shape != (problem.grid.size,) or not np.all(np.isfinite(log_phi)):
            raise ValueError("init must be a finite log-potential on the problem grid")
    log_phi = normalize_sup(log_phi)

    trace = []
    converged = False
    for _ in range(max_iter):
        nxt = sinkhorn_step(problem, log_phi)
        d = hilbert_distance(log_phi, nxt)
        trace.append(d)
        log_phi = nxt
        if d < tol:
            converged = True
            break

    log_phihat0 = problem.log_rho0 - problem.operator(1.0).apply(log_phi, "log")
    potentials = SchrodingerPotentials(log_phi, log_phihat0)
    r0, r1 = marginal_residuals(problem, potentials)
    report = ConvergenceReport(
        iterations=len(trace),
        dH_trace=trace,
        contraction_estimate=_contraction_estimate(trace),
        terminal_residual=trace[-1] if trace else float("nan"),
        converged=converged,
        residual_rho0=r0,
        residual_rho1=r1,
    )
    return potentials, report
