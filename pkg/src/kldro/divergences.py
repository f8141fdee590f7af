"""Relative entropy, Pearson divergence, entropy and observed Fisher information.

All logarithms are natural (nats). Zero probabilities follow the usual
conventions exactly: ``0 log(0/p) = 0`` and ``p' log(p'/0) = +inf``; nothing is
smoothed.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, InputError
from .simplex import as_weights


def _pair(Pp, P) -> tuple[np.ndarray, np.ndarray]:
    a, b = as_weights(Pp), as_weights(P)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.size} vs {b.size} scenarios")
    return a, b


def relative_entropy(Pp, P) -> float:
    """KL divergence ``I(Pp, P) = sum Pp(i) log(Pp(i) / P(i))``, possibly ``inf``."""
    a, b = _pair(Pp, P)
    s = a > 0
    if np.any(b[s] <= 0):
        return math.inf
    terms = a[s] * (np.log(a[s]) - np.log(b[s]))
    return max(math.fsum(terms), 0.0)


def relative_entropy_many(Pp, Ps: np.ndarray) -> np.ndarray:
    """``I(Pp, P)`` for every row ``P`` of ``Ps``."""
    a = as_weights(Pp)
    Ps = np.atleast_2d(np.asarray(Ps, dtype=float))
    s = a > 0
    sub = Ps[:, s]
    with np.errstate(divide="ignore"):
        logs = np.log(sub)
    out = (a[s] * np.log(a[s])).sum() - logs @ a[s]
    out = np.maximum(out, 0.0)
    out[np.any(sub <= 0, axis=1)] = math.inf
    return out


def relative_entropy_from(Pps: np.ndarray, P) -> np.ndarray:
    """``I(Pp, P)`` for every row ``Pp`` of ``Pps`` (fixed second argument)."""
    b = as_weights(P)
    Pps = np.atleast_2d(np.asarray(Pps, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Pps > 0, Pps * (np.log(Pps) - np.log(b)), 0.0)
    out = np.maximum(terms.sum(axis=1), 0.0)
    return np.where(np.isnan(out), math.inf, out)


def entropy(P) -> float:
    w = as_weights(P)
    s = w > 0
    return max(-math.fsum(w[s] * np.log(w[s])), 0.0)


def pearson_divergence(Pp, P) -> float:
    """Chi-square distance ``sum (Pp(i) - P(i))^2 / Pp(i)``; needs ``Pp > 0``."""
    a, b = _pair(Pp, P)
    if np.any(a <= 0):
        raise DomainError("Pearson divergence needs a strictly positive first argument")
    return math.fsum((a - b) ** 2 / a)


def observed_fisher(Pp) -> np.ndarray:
    a = as_weights(Pp)
    if np.any(a <= 0):
        raise DomainError("observed Fisher information needs a strictly positive distribution")
    return np.diag(1.0 / a)


def log_path_probability(counts, P) -> float:
    """Log-probability of one ordered sample path with the given visit counts."""
    counts = np.asarray(counts, dtype=float)
    w = as_weights(P)
    s = counts > 0
    if np.any(w[s] <= 0):
        return -math.inf
    return float(counts[s] @ np.log(w[s]))


def fisher_finite_difference(Pp, T: int = 1000, h: float = 1e-4) -> np.ndarray:
    """Observed Fisher information by central differences of the log path probability.

    Uses a synthetic path of length ``T`` whose visit counts are ``T * Pp``
    and differentiates at the point ``P = Pp`` (the log-likelihood is treated
    as a function on the positive orthant, not restricted to the simplex).
    """
    a = as_weights(Pp)
    if np.any(a <= 0):
        raise DomainError("finite-difference Fisher needs a strictly positive distribution")
    counts = T * a
    d = a.size
    H = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            hi, hj = h * a[i], h * a[j]

            def f(si, sj):
                x = a.copy()
                x[i] += si * hi
                x[j] += sj * hj
                return float(counts @ np.log(x))

            H[i, j] = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * hi * hj)
    return -H / T


def taylor_gap(Pp, P) -> tuple[float, float, float]:
    """Return ``(kl, quad, kl - quad)`` with ``quad = 0.5 (P-Pp)' F(Pp) (P-Pp)``."""
    a, b = _pair(Pp, P)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("Taylor gap needs strictly positive arguments")
    kl = relative_entropy(a, b)
    diff = b - a
    quad = 0.5 * float(diff @ observed_fisher(a) @ diff)
    return kl, quad, kl - quad
