"""Grids, Haar quadrature and basic Lie-group maps for SO(2) and SO(3).

SO(2) is discretized as a uniform circle grid.  On SO(3) only class
functions (functions of the rotation angle) are represented; the Haar
measure restricted to those reduces to ``(2/pi) sin^2(theta/2) dtheta``
on ``[0, pi]``, discretized with the midpoint rule.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

MIN_NODES = 8


class Group(str, Enum):
    SO2 = "so2"
    SO3 = "so3"

    @property
    def algebra_dim(self) -> int:
        return 1 if self is Group.SO2 else 3


@dataclass(frozen=True, eq=False)
class GroupGrid:
    """Quadrature grid on SO(2) or on the SO(3) rotation-angle classes."""

    group: Group
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def spacing(self) -> float:
        return (2.0 * np.pi if self.group is Group.SO2 else np.pi) / self.size

    @property
    def periodic(self) -> bool:
        return self.group is Group.SO2

    def integrate(self, values) -> float:
        """Haar integral of a grid function."""
        return float(np.dot(np.asarray(values, dtype=np.float64), self.weights))

    def node_index(self, angles) -> np.ndarray:
        """Index of the grid cell containing each angle."""
        h = self.spacing
        a = np.asarray(angles, dtype=np.float64)
        if self.group is Group.SO2:
            return np.mod(np.rint(a / h).astype(np.int64), self.size)
        return np.clip(np.floor(a / h).astype(np.int64), 0, self.size - 1)

    def same_as(self, other: "GroupGrid") -> bool:
        return (self is other) or (
            self.group is other.group
            and self.size == other.size
            and np.array_equal(self.nodes, other.nodes)
        )


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Probability density w.r.t. normalized Haar measure, sampled on a grid."""

    grid: GroupGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.size,):
            raise ValueError(f"density has shape {self.values.shape}, grid has {self.grid.size} nodes")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite and nonnegative")
        self.values.setflags(write=False)

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.values)

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.values > 0))


def make_grid(group, n_nodes: int) -> GroupGrid:
    group = Group(group)
    n_nodes = int(n_nodes)
    if n_nodes < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n_nodes}")
    if group is Group.SO2:
        nodes = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        weights = np.full(n_nodes, 1.0 / n_nodes)
    else:
        h = np.pi / n_nodes
        nodes = (np.arange(n_nodes) + 0.5) * h
        weights = (2.0 / np.pi) * np.sin(nodes / 2.0) ** 2 * h
        # midpoint rule is exact here; the division only removes rounding
        weights = weights / weights.sum()
    return GroupGrid(group, nodes, weights)


def density_from_log(grid: GroupGrid, log_values) -> DensityGrid:
    """Normalize ``exp(log_values)`` to unit Haar mass on the grid."""
    log_values = np.asarray(log_values, dtype=np.float64)
    shifted = np.exp(log_values - np.max(log_values))
    return DensityGrid(grid, shifted / grid.integrate(shifted))


def von_mises_so2(grid: GroupGrid, kappa: float, theta0: float) -> DensityGrid:
    if grid.group is not Group.SO2:
        raise ValueError("von_mises_so2 requires an SO(2) grid")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return density_from_log(grid, kappa * np.cos(grid.nodes - theta0))


def von_mises_so3_class(grid: GroupGrid, kappa: float, omega_norm0: float) -> DensityGrid:
    """Rotation-angle von Mises density ``exp(kappa cos(|w| - |w0|))`` on SO(3)."""
    if grid.group is not Group.SO3:
        raise ValueError("von_mises_so3_class requires an SO(3) class grid")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if not 0.0 < omega_norm0 <= np.pi:
        raise ValueError(f"rotation angle must lie in (0, pi], got {omega_norm0}")
    return density_from_log(grid, kappa * np.cos(grid.nodes - omega_norm0))


def uniform_density(grid: GroupGrid) -> DensityGrid:
    return DensityGrid(grid, np.ones(grid.size))


# ---------------------------------------------------------------------------
# hat / vee / exp / log
# ---------------------------------------------------------------------------

def hat(v) -> np.ndarray:
    """Map R^1 -> so(2) or R^3 -> so(3).  Accepts a trailing batch axis of size 1 or 3."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 0 or v.shape[-1] == 1:
        a = v if v.ndim == 0 else v[..., 0]
        out = np.zeros(np.shape(a) + (2, 2))
        out[..., 0, 1] = -a
        out[..., 1, 0] = a
        return out
    if v.shape[-1] != 3:
        raise ValueError(f"hat expects 1 or 3 coordinates, got shape {v.shape}")
    out = np.zeros(v.shape[:-1] + (3, 3))
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


def vee(m, atol: float = 1e-8) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    sym = m + np.swapaxes(m, -1, -2)
    if np.max(np.abs(sym), initial=0.0) > 2.0 * atol:
        raise ValueError("matrix is not skew-symmetric")
    if m.shape[-2:] == (2, 2):
        return m[..., 1, 0][..., None]
    if m.shape[-2:] == (3, 3):
        return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)
    raise ValueError(f"vee expects 2x2 or 3x3 matrices, got {m.shape}")


def exp_so3(omega) -> np.ndarray:
    """Rodrigues formula, vectorized over leading axes."""
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape[-1] != 3:
        raise ValueError(f"exp_so3 expects 3-vectors, got shape {omega.shape}")
    theta = np.linalg.norm(omega, axis=-1)
    W = hat(omega)
    W2 = W @ W
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0, np.sin(safe) / safe)
    b = np.where(small, 0.5, (1.0 - np.cos(safe)) / safe**2)
    return np.eye(3) + a[..., None, None] * W + b[..., None, None] * W2


def rotation_angle(R) -> np.ndarray:
    """Rotation angle in [0, pi] of SO(3) matrices."""
    R = np.asarray(R, dtype=np.float64)
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    return np.arccos(np.clip(c, -1.0, 1.0))


def log_so3(R) -> np.ndarray:
    """Inverse of exp_so3 returning ``omega`` with ``|omega| <= pi``."""
    R = np.asarray(R, dtype=np.float64)
    theta = rotation_angle(R)
    skew = np.stack([R[..., 2, 1] - R[..., 1, 2],
                     R[..., 0, 2] - R[..., 2, 0],
                     R[..., 1, 0] - R[..., 0, 1]], axis=-1)
    s = np.sin(theta)
    out = np.empty(theta.shape + (3,))
    regular = s > 1e-6
    small = (~regular) & (theta < 1.0)
    near_pi = (~regular) & (theta >= 1.0)

    out[regular] = (theta[regular] / (2.0 * s[regular]))[..., None] * skew[regular]
    out[small] = 0.5 * skew[small]
    if np.any(near_pi):
        # axis from the symmetric part: R + I = 2 n n^T when theta = pi
        B = 0.5 * (R[near_pi] + np.eye(3))
        diag = np.clip(np.diagonal(B, axis1=-2, axis2=-1), 0.0, None)
        k = np.argmax(diag, axis=-1)
        idx = np.arange(B.shape[0])
        col = B[idx, :, k]
        axis = col / np.sqrt(np.maximum(diag[idx, k], 1e-300))[..., None]
        axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
        # fix the sign using the (tiny) skew part when available
        sign = np.sign(np.sum(axis * skew[near_pi], axis=-1))
        sign[sign == 0] = 1.0
        out[near_pi] = (sign * theta[near_pi])[..., None] * axis
    return out


def is_rotation(R, atol: float = 1e-10) -> bool:
    R = np.asarray(R, dtype=np.float64)
    eye = np.eye(R.shape[-1])
    ortho = np.max(np.abs(np.swapaxes(R, -1, -2) @ R - eye))
    det = np.max(np.abs(np.linalg.det(R) - 1.0))
    return bool(ortho <= atol and det <= atol)


def orthogonality_defect(R) -> float:
    R = np.asarray(R, dtype=np.float64)
    eye = np.eye(R.shape[-1])
    return float(np.max(np.abs(np.swapaxes(R, -1, -2) @ R - eye)))
