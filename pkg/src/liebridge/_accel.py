"""Hot numeric kernels with an optional numba path.

Set ``LIEBRIDGE_DISABLE_NUMBA=1`` to force the pure-numpy implementations
(useful for debugging or when numba is unavailable).  ``LIEBRIDGE_THREADS``
caps the numba thread pool; 0 or unset means numba's default.
"""

import os
import warnings

import numpy as np

_DISABLED = os.environ.get("LIEBRIDGE_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit, prange, set_num_threads, config as _nb_config

    # an outdated system TBB makes numba warn once and fall back to OpenMP
    warnings.filterwarnings("ignore", message="The TBB threading layer requires")

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_ENABLED = False

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper

    prange = range


def configure_threads() -> int:
    """Apply LIEBRIDGE_THREADS to numba; return the thread count in use."""
    if not NUMBA_ENABLED:
        return 1
    requested = int(os.environ.get("LIEBRIDGE_THREADS", "0") or 0)
    limit = _nb_config.NUMBA_NUM_THREADS
    n = limit if requested <= 0 else min(requested, limit)
    set_num_threads(n)
    return n


# ---------------------------------------------------------------------------
# log-sum-exp matrix-vector product:  out[i] = log sum_j exp(A[i, j] + g[j])
# ---------------------------------------------------------------------------

def lse_matvec_numpy(log_a: np.ndarray, g: np.ndarray) -> np.ndarray:
    z = log_a + g[None, :]
    zmax = np.max(z, axis=1)
    finite = np.isfinite(zmax)
    shift = np.where(finite, zmax, 0.0)
    with np.errstate(divide="ignore"):
        out = shift + np.log(np.sum(np.exp(z - shift[:, None]), axis=1))
    out[~finite] = -np.inf
    return out


@njit(cache=True, parallel=True, fastmath=False)
def _lse_matvec_numba(log_a, g):
    n, m = log_a.shape
    out = np.empty(n)
    for i in prange(n):
        z = np.empty(m)
        zmax = -np.inf
        for j in range(m):
            z[j] = log_a[i, j] + g[j]
            if z[j] > zmax:
                zmax = z[j]
        if zmax == -np.inf:
            out[i] = -np.inf
            continue
        s = 0.0
        for j in range(m):
            s += np.exp(z[j] - zmax)
        out[i] = zmax + np.log(s)
    return out


def lse_matvec(log_a: np.ndarray, g: np.ndarray) -> np.ndarray:
    if NUMBA_ENABLED:
        return _lse_matvec_numba(np.ascontiguousarray(log_a), np.ascontiguousarray(g, dtype=np.float64))
    return lse_matvec_numpy(log_a, g)


# ---------------------------------------------------------------------------
# periodic / clamped linear interpolation of a grid function at many points
# ---------------------------------------------------------------------------

def interp_uniform_numpy(x, x0, h, values, periodic):
    n = values.shape[0]
    s = (x - x0) / h
    if periodic:
        i0 = np.floor(s).astype(np.int64)
        frac = s - i0
        i0 = np.mod(i0, n)
        i1 = np.mod(i0 + 1, n)
    else:
        s = np.clip(s, 0.0, n - 1.0)
        i0 = np.minimum(np.floor(s).astype(np.int64), n - 2)
        frac = s - i0
        i1 = i0 + 1
    return (1.0 - frac) * values[i0] + frac * values[i1]


@njit(cache=True, parallel=True)
def _interp_uniform_numba(x, x0, h, values, periodic):
    n = values.shape[0]
    out = np.empty(x.shape[0])
    for k in prange(x.shape[0]):
        s = (x[k] - x0) / h
        if periodic:
            fl = np.floor(s)
            frac = s - fl
            i0 = int(fl) % n
            i1 = (i0 + 1) % n
        else:
            if s < 0.0:
                s = 0.0
            elif s > n - 1.0:
                s = n - 1.0
            i0 = int(np.floor(s))
            if i0 > n - 2:
                i0 = n - 2
            frac = s - i0
            i1 = i0 + 1
        out[k] = (1.0 - frac) * values[i0] + frac * values[i1]
    return out


def interp_uniform(x, x0: float, h: float, values, periodic: bool) -> np.ndarray:
    """Linear interpolation on a uniform grid ``x0 + h * i``."""
    x = np.asarray(x, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if NUMBA_ENABLED:
        return _interp_uniform_numba(np.ascontiguousarray(x.ravel()), float(x0), float(h),
                                     np.ascontiguousarray(values), bool(periodic)).reshape(x.shape)
    return interp_uniform_numpy(x, x0, h, values, periodic)


if NUMBA_ENABLED:
    configure_threads()
