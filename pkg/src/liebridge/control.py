"""Recover the optimal density flow, value function and feedback control.

With ``phi(t) = T_{1-t} phi_1`` and ``phihat(t) = T_t phihat_0``:

    rho_opt = phi * phihat,   S = sigma^2 log phi,   Omega = sigma^2 d/dtheta log phi.

On SO(3) everything is a class function and the control points along the
rotation axis with magnitude ``sigma^2 d/dtheta log phi``.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import DensityGrid, Group, GroupGrid
from .sinkhorn import BridgeProblem, SchrodingerPotentials

log = logging.getLogger(__name__)

MASS_WARN = 1e-6
MASS_FAIL = 1e-4
DEFAULT_N_TIMES = 21


class MassDriftError(RuntimeError):
    """Recovered density lost or gained mass; the grid or truncation is inadequate."""


def default_times(n: int = DEFAULT_N_TIMES) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def _check_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if np.any(times < 0.0) or np.any(times > 1.0):
        raise ValueError("times must lie in [0, 1]")
    return times


def propagate_potentials(problem: BridgeProblem, potentials: SchrodingerPotentials, times):
    """Log potentials ``(log phi(t), log phihat(t))`` at each requested time, shape (T, N)."""
    times = _check_times(times)
    n = problem.grid.size
    log_phi = np.empty((times.size, n))
    log_phihat = np.empty((times.size, n))
    for k, t in enumerate(times):
        log_phi[k] = problem.operator(1.0 - t).apply(potentials.log_phi1, "log")
        log_phihat[k] = problem.operator(t).apply(potentials.log_phihat0, "log")
    return log_phi, log_phihat


def density_at(grid: GroupGrid, log_phi_t, log_phihat_t) -> DensityGrid:
    values = np.exp(np.asarray(log_phi_t) + np.asarray(log_phihat_t))
    drift = abs(grid.integrate(values) - 1.0)
    if drift > MASS_FAIL:
        raise MassDriftError(f"density mass off by {drift:.3e}")
    if drift > MASS_WARN:
        log.warning("density mass drift %.3e exceeds %.0e", drift, MASS_WARN)
    return DensityGrid(grid, values)


# ---------------------------------------------------------------------------
# differentiation on the grids
# ---------------------------------------------------------------------------

def _wavenumbers(n: int) -> np.ndarray:
    m = np.rint(np.fft.fftfreq(n) * n)
    if n % 2 == 0:
        m[n // 2] = 0.0  # Nyquist mode has no odd derivative
    return m


def spectral_derivative(f, order: int = 1) -> np.ndarray:
    """Derivative of a periodic grid function on [0, 2pi)."""
    f = np.asarray(f, dtype=np.float64)
    n = f.shape[-1]
    if order == 1:
        mult = 1j * _wavenumbers(n)
    else:
        mult = (1j * np.rint(np.fft.fftfreq(n) * n)) ** order
        if order % 2 == 1 and n % 2 == 0:
            mult[n // 2] = 0.0
    return np.real(np.fft.ifft(np.fft.fft(f, axis=-1) * mult, axis=-1))


def centered_difference(f, h: float, periodic: bool) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if periodic:
        return (np.roll(f, -1, axis=-1) - np.roll(f, 1, axis=-1)) / (2.0 * h)
    return np.gradient(f, h, axis=-1, edge_order=2)


def angle_derivative(grid: GroupGrid, f) -> np.ndarray:
    if grid.group is Group.SO2:
        return spectral_derivative(f)
    return centered_difference(f, grid.spacing, periodic=False)


def control_at(problem: BridgeProblem, log_phi_t) -> np.ndarray:
    """Feedback control ``sigma^2 d/dtheta log phi`` on the grid (rad/s)."""
    return problem.sigma**2 * angle_derivative(problem.grid, log_phi_t)


def _class_divergence(grid: GroupGrid, flux) -> np.ndarray:
    # radial divergence for class functions: (1/J) d/dtheta (J flux), J = sin^2(theta/2)
    J = np.sin(grid.nodes / 2.0) ** 2
    return centered_difference(J * flux, grid.spacing, periodic=False) / J


def laplacian(grid: GroupGrid, f) -> np.ndarray:
    if grid.group is Group.SO2:
        return spectral_derivative(f, order=2)
    return _class_divergence(grid, centered_difference(f, grid.spacing, periodic=False))


def divergence(grid: GroupGrid, flux) -> np.ndarray:
    if grid.group is Group.SO2:
        return spectral_derivative(flux)
    return _class_divergence(grid, flux)


# ---------------------------------------------------------------------------
# solution container
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BridgeSolution:
    problem: BridgeProblem
    potentials: SchrodingerPotentials
    times: np.ndarray
    log_phi: np.ndarray
    log_phihat: np.ndarray
    rho_opt: np.ndarray
    S: np.ndarray
    control: np.ndarray

    @property
    def grid(self) -> GroupGrid:
        return self.problem.grid

    def density(self, k: int) -> DensityGrid:
        return DensityGrid(self.grid, self.rho_opt[k])

    def masses(self) -> np.ndarray:
        return self.rho_opt @ self.grid.weights

    def fields_at(self, t: float):
        """(log_phi, log_phihat, rho, control) at an arbitrary time."""
        lp, lh = propagate_potentials(self.problem, self.potentials, [t])
        rho = density_at(self.grid, lp[0], lh[0]).values
        return lp[0], lh[0], rho, control_at(self.problem, lp[0])

    def argmax_trajectory(self) -> np.ndarray:
        return self.grid.nodes[np.argmax(self.rho_opt, axis=1)]


def build_solution(problem: BridgeProblem, potentials: SchrodingerPotentials,
                   times: Optional[Sequence[float]] = None) -> BridgeSolution:
    times = default_times() if times is None else _check_times(times)
    log_phi, log_phihat = propagate_potentials(problem, potentials, times)
    rho = np.stack([density_at(problem.grid, a, b).values for a, b in zip(log_phi, log_phihat)])
    S = problem.sigma**2 * log_phi
    control = np.stack([control_at(problem, lp) for lp in log_phi])
    return BridgeSolution(problem, potentials, times, log_phi, log_phihat, rho, S, control)


def fokker_planck_residual(problem: BridgeProblem, potentials: SchrodingerPotentials,
                           t: float, dt: float, control_scale: float = 1.0) -> float:
    """Haar-weighted L2 norm of the controlled Fokker-Planck residual at time ``t``.

    ``control_scale=0`` evaluates the same residual for the uncontrolled heat flow.
    """
    if not (dt > 0 and t - dt >= 0.0 and t + dt <= 1.0):
        raise ValueError(f"stencil t +/- dt = {t} +/- {dt} leaves [0, 1]")
    grid = problem.grid
    lp, lh = propagate_potentials(problem, potentials, [t - dt, t, t + dt])
    rho = np.exp(lp + lh)
    drho_dt = (rho[2] - rho[0]) / (2.0 * dt)
    dS = control_scale * problem.sigma**2 * angle_derivative(grid, lp[1])
    r = drho_dt + divergence(grid, rho[1] * dS) - 0.5 * problem.sigma**2 * laplacian(grid, rho[1])
    return float(np.sqrt(grid.integrate(r**2)))
