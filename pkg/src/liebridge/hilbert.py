"""Hilbert's projective metric on strictly positive grid functions.

Every function here takes and returns *log* values, so potentials spanning
hundreds of log-units never overflow.
"""

import numpy as np


def _check_pair(log_x, log_y):
    log_x = np.asarray(log_x, dtype=np.float64)
    log_y = np.asarray(log_y, dtype=np.float64)
    if log_x.shape != log_y.shape:
        raise ValueError(f"grid mismatch: {log_x.shape} vs {log_y.shape}")
    if not (np.all(np.isfinite(log_x)) and np.all(np.isfinite(log_y))):
        raise ValueError("Hilbert metric needs strictly positive functions (finite log-values)")
    return log_x, log_y


def hilbert_distance(log_x, log_y) -> float:
    """d_H(x, y) = log max(x/y) - log min(x/y)."""
    log_x, log_y = _check_pair(log_x, log_y)
    delta = log_x - log_y
    return float(np.max(delta) - np.min(delta))


def normalize_sup(log_x) -> np.ndarray:
    """Project onto the unit sup-norm sphere: subtract the max log-value."""
    log_x = np.asarray(log_x, dtype=np.float64)
    return log_x - np.max(log_x)


def pointwise_ratio(log_f, log_g) -> np.ndarray:
    """log of ``f / g``."""
    log_f, log_g = _check_pair(log_f, log_g)
    return log_f - log_g


def random_positive_pairs(n_nodes: int, n_pairs: int, rng, periodic: bool = True):
    """Random pairs of log-functions for probing contraction of positive operators.

    Each pair is a random smooth base field and the same field plus a
    sign-like perturbation of random amplitude.  Sign-like perturbations of
    low-frequency fields are the directions a smoothing operator contracts
    least, so the empirical ratio comes close to the true contraction
    constant instead of only sampling easy directions.
    """
    x = (np.arange(n_nodes) + (0.0 if periodic else 0.5)) / n_nodes
    ang = (2.0 if periodic else 1.0) * np.pi * x
    pairs = []
    for _ in range(n_pairs):
        base = np.zeros(n_nodes)
        pert = np.zeros(n_nodes)
        for m in range(1, 5):
            a, b, c, d = rng.standard_normal(4)
            base += (a * np.cos(m * ang) + b * np.sin(m * ang)) / m
            pert += (c * np.cos(m * ang) + d * np.sin(m * ang)) / m**2
        # centre so the perturbation changes sign; a single-signed one saturates
        # the tanh into a constant shift, i.e. a projectively equal pair
        pert -= np.mean(pert)
        sharpness = rng.uniform(1.0, 50.0)
        amplitude = 10.0 ** rng.uniform(-3.0, 0.5)
        log_f1 = rng.uniform(0.1, 3.0) * base
        log_f2 = log_f1 + amplitude * np.tanh(sharpness * pert / np.max(np.abs(pert)))
        pairs.append((log_f1, log_f2))
    return pairs


def contraction_ratios(operator, pairs) -> np.ndarray:
    """``d_H(T f1, T f2) / d_H(f1, f2)`` for each pair, evaluated in log domain."""
    ratios = []
    for g1, g2 in pairs:
        den = hilbert_distance(g1, g2)
        if not den > 1e-12 * max(1.0, float(np.max(np.abs(g1)))):
            raise ValueError("pair is projectively equal; the contraction ratio is undefined")
        num = hilbert_distance(operator.apply(g1, "log"), operator.apply(g2, "log"))
        ratios.append(num / den)
    return np.asarray(ratios)
