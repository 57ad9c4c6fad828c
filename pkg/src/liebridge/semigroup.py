"""Heat kernels on SO(2)/SO(3) and the heat semigroup acting on grid functions.

All kernels are densities w.r.t. the *normalized* Haar measure, so
``T_t 1 = 1`` on both groups.

On SO(3) the operator acts on class functions only.  Its matrix is the
conjugation average of the heat kernel,

    K_t(theta, theta') = sum_l exp(-l(l+1) sigma^2 t / 2) chi_l(theta) chi_l(theta'),

with ``chi_l`` the spin-l character.  The midpoint quadrature of the class
grid integrates products of characters exactly, so the discrete operators
inherit the semigroup law and stochasticity without quadrature error.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ._accel import lse_matvec
from .geometry import Group, GroupGrid, make_grid

KERNEL_FLOOR = 1e-300
DEFAULT_L_MAX = 60
# below this sigma^2 t the SO(2) log-kernel is evaluated as a wrapped Gaussian
_WRAPPED_GAUSSIAN_LIMIT = 1.0
_N_IMAGES = 4


@dataclass(frozen=True)
class HeatKernelSO2:
    sigma: float
    m_max: Optional[int] = None  # None -> Nyquist bound of the grid it is applied on

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def truncation(self, grid: Optional[GroupGrid] = None) -> int:
        if self.m_max is not None:
            return int(self.m_max)
        if grid is None:
            raise ValueError("m_max unset and no grid to infer it from")
        return grid.size // 2


@dataclass(frozen=True)
class HeatKernelSO3:
    sigma: float
    l_max: int = DEFAULT_L_MAX

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.l_max < 0:
            raise ValueError("l_max must be nonnegative")

    @property
    def t_min(self) -> float:
        """Smallest time for which the truncated series is trusted."""
        return 2.0 / (self.sigma**2 * max(self.l_max, 1) ** 2)


def kernel_for(group, sigma: float, truncation: Optional[int] = None):
    if Group(group) is Group.SO2:
        return HeatKernelSO2(sigma, truncation)
    return HeatKernelSO3(sigma, DEFAULT_L_MAX if truncation is None else truncation)


def _check_time(t: float) -> None:
    if not t > 0:
        raise ValueError(f"kernel time must be positive, got {t}")


def kernel_value_so2(kernel: HeatKernelSO2, t: float, dtheta, m_max: Optional[int] = None) -> np.ndarray:
    """Truncated Fourier series ``sum_{|m|<=m_max} exp(-sigma^2 m^2 t / 2) cos(m dtheta)``."""
    _check_time(t)
    if m_max is None:
        m_max = kernel.truncation()
    dtheta = np.asarray(dtheta, dtype=np.float64)
    m = np.arange(1, m_max + 1)
    coef = np.exp(-0.5 * kernel.sigma**2 * m**2 * t)
    return 1.0 + 2.0 * np.tensordot(np.cos(np.multiply.outer(dtheta, m)), coef, axes=([-1], [0]))


def log_kernel_so2(kernel: HeatKernelSO2, t: float, dtheta, m_max: int) -> np.ndarray:
    """log of the SO(2) heat kernel, accurate far into the tails.

    For small ``sigma^2 t`` the Fourier series loses all relative accuracy in
    the tails, so the Poisson-summed (wrapped Gaussian) form is used there.
    Both forms agree to machine precision whenever the Fourier truncation is
    negligible.
    """
    _check_time(t)
    s2t = kernel.sigma**2 * t
    d = np.mod(np.asarray(dtheta, dtype=np.float64) + np.pi, 2.0 * np.pi) - np.pi
    if s2t >= _WRAPPED_GAUSSIAN_LIMIT:
        return np.log(np.maximum(kernel_value_so2(kernel, t, d, m_max), KERNEL_FLOOR))
    n = np.arange(-_N_IMAGES, _N_IMAGES + 1)
    expo = -np.add.outer(d, 2.0 * np.pi * n) ** 2 / (2.0 * s2t)
    top = np.max(expo, axis=-1)
    lse = top + np.log(np.sum(np.exp(expo - top[..., None]), axis=-1))
    return 0.5 * np.log(2.0 * np.pi / s2t) + lse


def characters_so3(l_max: int, theta) -> np.ndarray:
    """``chi_l(theta) = sin((l + 1/2) theta) / sin(theta / 2)``, shape (l_max+1, ...)."""
    theta = np.asarray(theta, dtype=np.float64)
    ell = np.arange(l_max + 1).reshape((-1,) + (1,) * theta.ndim)
    s = np.sin(theta / 2.0)
    tiny = np.abs(s) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = np.sin((ell + 0.5) * theta) / s
    return np.where(tiny, (2 * ell + 1) * np.ones_like(theta), chi)


def kernel_value_so3(kernel: HeatKernelSO3, t: float, theta12) -> np.ndarray:
    """Heat kernel between two rotations whose relative rotation angle is ``theta12``."""
    _check_time(t)
    ell = np.arange(kernel.l_max + 1)
    coef = (2 * ell + 1) * np.exp(-ell * (ell + 1) * kernel.sigma**2 * t / 2.0)
    chi = characters_so3(kernel.l_max, theta12)
    val = np.tensordot(coef, chi, axes=(0, 0))
    return np.maximum(val, KERNEL_FLOOR)


def class_kernel_so3(kernel: HeatKernelSO3, t: float, theta, theta_prime) -> np.ndarray:
    """Conjugation-averaged SO(3) heat kernel between two rotation-angle classes."""
    _check_time(t)
    ell = np.arange(kernel.l_max + 1)
    coef = np.exp(-ell * (ell + 1) * kernel.sigma**2 * t / 2.0)
    a = characters_so3(kernel.l_max, theta)
    b = characters_so3(kernel.l_max, theta_prime)
    return np.einsum("l,l...,l...->...", coef, a, b)


class SemigroupOperator:
    """The heat semigroup ``T_t`` on a fixed grid.

    SO(2) uses an FFT spectral multiplier in the linear domain; both groups
    use a dense log-kernel with a log-sum-exp reduction in the log domain.
    """

    def __init__(self, grid: GroupGrid, kernel, t: float):
        if not 0.0 <= t:
            raise ValueError(f"time must be nonnegative, got {t}")
        self.grid = grid
        self.kernel = kernel
        self.t = float(t)
        self.identity = self.t == 0.0
        self._log_w = np.log(grid.weights)
        if self.identity:
            return
        if grid.group is Group.SO2:
            if not isinstance(kernel, HeatKernelSO2):
                raise TypeError("SO(2) grid needs a HeatKernelSO2")
            n = grid.size
            m_max = kernel.truncation(grid)
            m = np.rint(np.fft.fftfreq(n) * n)
            self.multiplier = np.where(np.abs(m) <= m_max, np.exp(-0.5 * kernel.sigma**2 * m**2 * self.t), 0.0)
            offsets = log_kernel_so2(kernel, self.t, grid.nodes, m_max)
            idx = np.subtract.outer(np.arange(n), np.arange(n)) % n
            self.log_matrix = offsets[idx] + self._log_w[None, :]
        else:
            if not isinstance(kernel, HeatKernelSO3):
                raise TypeError("SO(3) grid needs a HeatKernelSO3")
            K = class_kernel_so3(kernel, self.t, grid.nodes[:, None], grid.nodes[None, :])
            K = np.maximum(K, KERNEL_FLOOR)
            self.matrix = K * grid.weights[None, :]
            self.log_matrix = np.log(K) + self._log_w[None, :]
        self.log_matrix.setflags(write=False)

    def kernel_matrix(self) -> np.ndarray:
        """``k_t(theta_i, theta_j)`` on the grid (without quadrature weights)."""
        if self.identity:
            raise ValueError("T_0 has no kernel matrix")
        return np.exp(self.log_matrix - self._log_w[None, :])

    def apply(self, f, domain: str = "linear") -> np.ndarray:
        f = np.asarray(f, dtype=np.float64)
        if f.shape != (self.grid.size,):
            raise ValueError(f"grid function has shape {f.shape}, grid has {self.grid.size} nodes")
        if domain == "linear":
            if np.any(f < 0):
                raise ValueError("linear-domain apply requires a nonnegative function")
            if self.identity:
                return f.copy()
            if self.grid.group is Group.SO2:
                return np.real(np.fft.ifft(np.fft.fft(f) * self.multiplier))
            return self.matrix @ f
        if domain == "log":
            if np.any(np.isnan(f)):
                raise ValueError("log-domain input contains NaN")
            if self.identity:
                return f.copy()
            return lse_matvec(self.log_matrix, f)
        raise ValueError(f"unknown domain {domain!r}")

    def __call__(self, f, domain: str = "linear") -> np.ndarray:
        return self.apply(f, domain)


@lru_cache(maxsize=64)
def _cached_operator(group: Group, size: int, kernel, t: float) -> SemigroupOperator:
    return SemigroupOperator(make_grid(group, size), kernel, t)


def semigroup(grid: GroupGrid, kernel, t: float) -> SemigroupOperator:
    """Build or fetch a cached operator.  Grids are identified by (group, size)."""
    op = _cached_operator(grid.group, grid.size, kernel, float(t))
    if not op.grid.same_as(grid):
        return SemigroupOperator(grid, kernel, t)
    return op
