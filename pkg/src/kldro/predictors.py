"""Data-driven predictors and the prescriptors they induce.

The central object is the worst-case expected cost over a relative-entropy
ball around an estimator realization ``Pp``::

    dro(g, Pp, r) = max { g . P : P in simplex, KL(Pp, P) <= r }

It is evaluated through its one-dimensional Lagrangian dual

    h(mu) = mu - exp(-r) * prod_i (mu - g_i) ** Pp_i,

minimized over ``mu > max_{Pp_i > 0} g_i`` and ``mu >= max_i g_i``. Writing
``mu = m_S + t`` with ``m_S`` the largest observed cost, the stationarity
condition ``h'(mu) = 0`` reads

    phi(t) = sum_i Pp_i log(t + a_i) + log sum_i Pp_i / (t + a_i) - r = 0,

``a_i = m_S - g_i >= 0`` on the support. ``phi`` is strictly decreasing and
equals ``log GM - log HM - r`` of the shifted costs, so it is bracketed by
``t -> 0`` (``phi -> +inf`` unless the observed costs are constant) and
``t = 2 A / expm1(r)`` with ``A = max a_i``. The worst-case distribution is
``P_i = lambda Pp_i / (t + a_i)`` with ``lambda = exp(-r) GM``; when an
unobserved scenario carries the largest cost the dual may stop at the
boundary ``mu = max_i g_i`` and the residual mass goes to that scenario.

Two solvers share this derivation: a scalar Brent solve that also returns a
:class:`DualCertificate`, and a vectorized bisection used for type
enumeration. They are tested against each other and against grid search.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .divergences import relative_entropy
from .errors import DomainError, InputError
from .simplex import CostMatrix, Distribution, SimplexGrid, as_weights

BISECT_STEPS = 200
# below this rate the robust value differs from the sample average by at most
# ~1e-125 times the cost spread, and t = mu - m_S would overflow
TINY_RATE = 1e-250
# smallest log t the solvers try; keeps t and a / t inside the normal range
LOG_T_FLOOR = -700.0


def _check(g, Pp) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(g, dtype=float).ravel()
    w = as_weights(Pp)
    if g.shape != w.shape:
        raise InputError(f"cost vector has {g.size} entries, distribution has {w.size}")
    if not np.all(np.isfinite(g)):
        raise InputError(f"non-finite cost vector {g.tolist()}")
    return g, w


def _check_rate(r: float) -> float:
    r = float(r)
    if not (r >= 0 and math.isfinite(r)):
        raise InputError(f"rate must be finite and nonnegative, got {r!r}")
    return r


# -- predictor kinds ---------------------------------------------------------


@dataclass(frozen=True)
class PredictorKind:
    """One of ``sample_average``, ``dro``, ``reverse``, ``markowitz``, ``pearson``."""

    name: str
    rate: float = 0.0

    NAMES = ("sample_average", "dro", "reverse", "markowitz", "pearson")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise InputError(f"unknown predictor kind {self.name!r}; choose from {', '.join(self.NAMES)}")
        object.__setattr__(self, "rate", _check_rate(self.rate))

    @classmethod
    def parse(cls, text: str, default_rate: float = 0.0) -> "PredictorKind":
        """Parse ``name`` or ``name:rate`` (e.g. ``dro:0.1``)."""
        name, _, rate = text.strip().partition(":")
        name = name.strip().lower().replace("-", "_")
        aliases = {"sa": "sample_average", "saa": "sample_average", "chi2": "pearson"}
        name = aliases.get(name, name)
        if name == "sample_average":
            return cls(name, 0.0)
        return cls(name, float(rate) if rate else default_rate)

    @property
    def label(self) -> str:
        if self.name == "sample_average":
            return "sample_average"
        return f"{self.name}(r={self.rate!r})"

    @property
    def slug(self) -> str:
        if self.name == "sample_average":
            return "sample_average"
        return f"{self.name}_r{self.rate!r}"


SampleAverage = PredictorKind("sample_average")


def DRO(r: float) -> PredictorKind:
    return PredictorKind("dro", r)


def ReverseDRO(r: float) -> PredictorKind:
    return PredictorKind("reverse", r)


def Markowitz(r: float) -> PredictorKind:
    return PredictorKind("markowitz", r)


def Pearson(r: float) -> PredictorKind:
    return PredictorKind("pearson", r)


# -- sample average ----------------------------------------------------------


def sample_average(g, Pp) -> float:
    g, w = _check(g, Pp)
    return float(np.dot(w, g))


# -- relative-entropy ball ---------------------------------------------------


@dataclass(frozen=True)
class DualCertificate:
    mu: float
    lam: float
    worst_case: Distribution
    primal_value: float
    dual_value: float
    kl_residual: float

    def gap(self) -> float:
        return self.dual_value - self.primal_value

    def problems(self, g=None) -> list[str]:
        """Violated certificate invariants (empty when sound)."""
        out = []
        scale = 1.0 + abs(self.primal_value)
        if not -1e-8 * scale <= self.gap() <= 1e-8 * scale:
            out.append(f"duality gap {self.gap()!r}")
        if not self.kl_residual <= 1e-8:
            out.append(f"kl residual {self.kl_residual!r}")
        if self.lam < 0:
            out.append(f"negative multiplier {self.lam!r}")
        if g is not None:
            g = np.asarray(g, dtype=float)
            if self.mu < g.max() - 1e-12:
                out.append(f"mu {self.mu!r} below max cost {g.max()!r}")
            attained = float(np.dot(self.worst_case.weights, g))
            if abs(attained - self.primal_value) > 1e-9:
                out.append(f"worst case attains {attained!r}, not {self.primal_value!r}")
        return out

    def summary(self) -> dict:
        return {
            "mu": self.mu,
            "lambda": self.lam,
            "worst_case": self.worst_case.weights.tolist(),
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "duality_gap": self.gap(),
            "kl_residual": self.kl_residual,
        }


def _dual_value(t: float, a: np.ndarray, w: np.ndarray, m_s: float, r: float) -> tuple[float, float]:
    """``(h(m_s + t), lambda)`` evaluated without cancellation for large ``t``."""
    # GM(t + a) = t * exp(sum w log1p(a / t)); h = m_s + t - exp(-r) GM
    s = float(np.dot(w, np.log1p(a / t)))
    gm = t * math.exp(s)
    value = m_s - t * math.expm1(s) - gm * math.expm1(-r)
    return value, math.exp(-r) * gm


def _h_series(z: np.ndarray) -> np.ndarray:
    """``expm1(-z) + z`` without cancellation near zero."""
    with np.errstate(over="ignore"):
        direct = np.expm1(-z) + z
    series = z * z * (0.5 - z * (1 / 6 - z * (1 / 24 - z * (1 / 120 - z / 720))))
    return np.where(np.abs(z) < 1e-2, series, direct)


def _stationarity(log_t, log_a: np.ndarray, w: np.ndarray, r: float):
    """``phi = log GM(t + a) - log HM(t + a) - r`` from centered logarithms.

    With ``y_i = log1p(a_i / t)`` and ``z = y - sum w y`` the first two terms
    equal ``log sum w exp(-z)``, which is evaluated as ``log1p(sum w h(z))``
    so that small rates (``phi + r ~ z^2 / 2``) keep full relative accuracy.
    Accepts one ``log_t`` with 1-D arrays or a vector of ``log_t`` with rows.
    """
    log_t = np.asarray(log_t, dtype=float)
    with np.errstate(over="ignore"):
        y = np.log1p(np.exp(log_a - log_t[..., None]))
    z = y - (w * y).sum(axis=-1, keepdims=True)
    with np.errstate(over="ignore"):
        return np.log1p((w * _h_series(z)).sum(axis=-1)) - r


def _stationarity_scalar(log_t: float, log_a: list[float], w: list[float], r: float) -> float:
    """Pure-Python :func:`_stationarity` for one ``t``; avoids array overhead."""
    y = [math.log1p(math.exp(min(la - log_t, 709.0))) if la > -math.inf else 0.0 for la in log_a]
    ybar = math.fsum(wi * yi for wi, yi in zip(w, y))
    acc = []
    for wi, yi in zip(w, y):
        z = yi - ybar
        if abs(z) < 1e-2:
            h = z * z * (0.5 - z * (1 / 6 - z * (1 / 24 - z * (1 / 120 - z / 720))))
        elif -z > 709.0:
            return math.inf
        else:
            h = math.expm1(-z) + z
        acc.append(wi * h)
    return math.log1p(math.fsum(acc)) - r


def _log_expm1(r: float) -> float:
    return r + math.log(-math.expm1(-r)) if r > 1.0 else math.log(math.expm1(r))


def _constant_solution(g, w, c):
    cert = DualCertificate(
        mu=float(g.max()), lam=0.0, worst_case=Distribution._trusted(w.copy()),
        primal_value=c, dual_value=c, kl_residual=-0.0,
    )
    return c, cert


def dro_predictor(g, Pp, r: float) -> tuple[float, DualCertificate]:
    """Worst-case expected cost over ``{P : KL(Pp, P) <= r}`` with a dual certificate.

    The returned value is the dual objective at the computed multiplier, hence
    a certified upper bound on the true maximum; the certificate's
    ``primal_value`` is attained by ``worst_case`` and the two agree to ~1e-12.
    """
    g, w = _check(g, Pp)
    r = _check_rate(r)
    if r < TINY_RATE:
        c = float(np.dot(w, g))
        return _constant_solution(g, w, c)
    sup = w > 0
    m_s = float(g[sup].max())
    m_all = float(g.max())
    if g.max() == g.min():
        return _constant_solution(g, w, float(g[0]))
    ws, a = w[sup], m_s - g[sup]
    A = float(a.max())
    t_min = m_all - m_s  # > 0 iff an unobserved scenario is strictly costlier

    with np.errstate(divide="ignore"):
        log_a = np.log(a)

    log_a_list, ws_list = log_a.tolist(), ws.tolist()

    def phi(log_t):
        return _stationarity_scalar(log_t, log_a_list, ws_list, r)

    if A == 0.0:
        if t_min == 0.0:
            return _constant_solution(g, w, m_s)
        # observed costs are constant: h is affine with slope 1 - exp(-r) > 0
        t, boundary = t_min, True
    else:
        hi = math.log(2.0 * A) - _log_expm1(r)
        lo = math.log(t_min) if t_min > 0 else math.log(A) - 700.0
        lo = max(lo, LOG_T_FLOOR)
        if phi(lo) <= 0:
            # optimum at (or numerically indistinguishable from) the boundary
            t, boundary = math.exp(lo), True
        else:
            hi = max(hi, lo)
            while phi(hi) > 0:
                hi += 1.0
            log_t = brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
            t, boundary = math.exp(log_t), False
    return _assemble(g, w, sup, ws, a, m_s, t, r, boundary)


def _assemble(g, w, sup, ws, a, m_s, t, r, boundary):
    dual, lam = _dual_value(t, a, ws, m_s, r)
    P = np.zeros_like(w)
    P[sup] = lam * ws / (t + a)
    residual = 1.0 - P.sum()
    if boundary and residual > 0:
        unobs = np.flatnonzero(~sup)
        if unobs.size and g[unobs].max() > m_s:
            # mass on the costliest unobserved scenario (lowest index on ties)
            P[unobs[np.argmax(g[unobs])]] += residual
        else:
            # t below the floor: the costliest observed scenarios absorb the rest
            top = np.flatnonzero(sup & (g == m_s))
            P[top] += residual * (w[top] / w[top].sum())
    P = np.maximum(P, 0.0)
    # underflowed support entries would make the divergence infinite
    P[sup] = np.maximum(P[sup], np.finfo(float).tiny)
    P /= P.sum()
    primal = float(np.dot(P, g))
    worst = Distribution._trusted(P)
    cert = DualCertificate(
        mu=m_s + t, lam=lam, worst_case=worst, primal_value=primal,
        dual_value=dual, kl_residual=relative_entropy(w, P) - r,
    )
    return dual, cert


def dro_value(g, Pp, r: float) -> float:
    return dro_predictor(g, Pp, r)[0]


@dataclass(frozen=True)
class BatchCertificate:
    """Row-wise :class:`DualCertificate` fields for a stack of realizations."""

    mu: np.ndarray
    lam: np.ndarray
    worst_case: np.ndarray
    primal_value: np.ndarray
    dual_value: np.ndarray
    kl_residual: np.ndarray

    def gap(self) -> np.ndarray:
        return self.dual_value - self.primal_value

    def failures(self, g) -> np.ndarray:
        """Boolean mask of rows violating the certificate invariants."""
        g = np.asarray(g, dtype=float)
        scale = 1.0 + np.abs(self.primal_value)
        bad = np.abs(self.gap()) > 1e-8 * scale
        bad |= ~(self.kl_residual <= 1e-8)
        bad |= self.lam < 0
        bad |= self.mu < g.max() - 1e-12
        bad |= np.abs(self.worst_case @ g - self.primal_value) > 1e-9
        return bad

    def __getitem__(self, k: int) -> DualCertificate:
        return DualCertificate(
            float(self.mu[k]), float(self.lam[k]), Distribution._trusted(self.worst_case[k]),
            float(self.primal_value[k]), float(self.dual_value[k]), float(self.kl_residual[k]),
        )


def _solve_many(g: np.ndarray, Pps: np.ndarray, r: float):
    """Batch bisection on ``log t``; returns the pieces both public wrappers need."""
    sup = Pps > 0
    m_s = np.where(sup, g, -np.inf).max(axis=1)
    a = np.where(sup, m_s[:, None] - g, 0.0)
    A = a.max(axis=1)
    t_min = g.max() - m_s

    with np.errstate(divide="ignore"):
        log_a = np.log(a)

    def phi(log_t):
        return _stationarity(log_t, log_a, Pps, r)

    flat = A == 0.0
    safe_A = np.where(flat, 1.0, A)
    hi = np.log(2.0 * safe_A) - _log_expm1(r)
    lo = np.where(t_min > 0, np.log(np.where(t_min > 0, t_min, 1.0)), np.log(safe_A) - 700.0)
    lo = np.maximum(lo, LOG_T_FLOOR)
    hi = np.maximum(hi, lo)
    at_boundary = flat | (phi(lo) <= 0)
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        pos = phi(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(lo))):
            break
    log_t = np.where(at_boundary, lo, 0.5 * (lo + hi))
    t = np.exp(log_t)
    t = np.where(flat, t_min, t)
    # g constant on the support and no costlier unobserved scenario
    degenerate = flat & (t_min == 0)
    t = np.where(degenerate, 1.0, t)
    s = (Pps * np.log1p(a / t[:, None])).sum(axis=1)
    gm = t * np.exp(s)
    value = m_s - t * np.expm1(s) - gm * math.expm1(-r)
    value = np.where(degenerate, m_s, value)
    lam = np.where(degenerate, 0.0, math.exp(-r) * gm)
    return value, t, lam, a, sup, m_s, at_boundary, degenerate


def _prepare_many(g, Pps, r):
    g = np.asarray(g, dtype=float).ravel()
    Pps = np.atleast_2d(np.asarray(Pps, dtype=float))
    if Pps.shape[1] != g.size:
        raise InputError(f"cost vector has {g.size} entries, distributions have {Pps.shape[1]}")
    if not np.all(np.isfinite(g)):
        raise InputError(f"non-finite cost vector {g.tolist()}")
    return g, Pps, _check_rate(r)


def dro_predictor_many(g, Pps: np.ndarray, r: float, return_mu: bool = False):
    """Vectorized ``dro_predictor`` values for every row of ``Pps``.

    Bisection on ``log t`` for all rows at once; see
    :func:`dro_certificates_many` for the matching certificates.
    """
    g, Pps, r = _prepare_many(g, Pps, r)
    sample = Pps @ g
    if r < TINY_RATE or g.max() == g.min():
        return (sample, np.full(sample.size, np.nan)) if return_mu else sample
    value, t, _, _, _, m_s, _, degenerate = _solve_many(g, Pps, r)
    if return_mu:
        return value, np.where(degenerate, m_s, m_s + t)
    return value


def dro_certificates_many(g, Pps: np.ndarray, r: float) -> tuple[np.ndarray, BatchCertificate]:
    """Batch values with certificates, assembled row-wise as in :func:`dro_predictor`."""
    g, Pps, r = _prepare_many(g, Pps, r)
    n, d = Pps.shape
    sample = Pps @ g
    if r < TINY_RATE or g.max() == g.min():
        value = sample if g.max() != g.min() else np.full(n, g[0])
        cert = BatchCertificate(
            np.full(n, g.max()), np.zeros(n), Pps.copy(), value.copy(), value.copy(), np.zeros(n),
        )
        return value, cert
    value, t, lam, a, sup, m_s, boundary, degenerate = _solve_many(g, Pps, r)
    P = np.where(sup, lam[:, None] * Pps / (t[:, None] + a), 0.0)
    residual = 1.0 - P.sum(axis=1)
    fill = boundary & ~degenerate & (residual > 0)
    unobs_cost = np.where(sup, -np.inf, g)
    j = np.argmax(unobs_cost, axis=1)
    to_unobs = fill & (unobs_cost.max(axis=1) > m_s)
    rows = np.flatnonzero(to_unobs)
    P[rows, j[rows]] += residual[rows]
    # t below the floor: the costliest observed scenarios absorb the rest
    to_top = fill & ~to_unobs
    top = sup & (g[None, :] == m_s[:, None])
    share = np.where(top, Pps, 0.0)
    share /= np.where(to_top, share.sum(axis=1), 1.0)[:, None]
    P += np.where(to_top[:, None], residual[:, None] * share, 0.0)
    P = np.where(degenerate[:, None], Pps, np.maximum(P, 0.0))
    P = np.where(sup, np.maximum(P, np.finfo(float).tiny), P)
    P /= P.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        kl = np.where(sup, Pps * (np.log(np.where(sup, Pps, 1.0)) - np.log(np.where(sup, P, 1.0))), 0.0).sum(axis=1)
    cert = BatchCertificate(
        mu=np.where(degenerate, m_s, m_s + t), lam=lam, worst_case=P,
        primal_value=P @ g, dual_value=value, kl_residual=np.maximum(kl, 0.0) - r,
    )
    return value, cert


def dro_brute_force(g, Pp, r: float, grid: SimplexGrid) -> float:
    """Grid-search lower bound on ``dro_predictor`` (independent oracle)."""
    g, w = _check(g, Pp)
    r = _check_rate(r)
    if grid.d != g.size:
        raise InputError(f"grid has d={grid.d}, cost vector has {g.size} entries")
    pts, logs = _grid_tables(grid)
    s = w > 0
    # termwise differences vanish exactly at the grid point equal to Pp
    kl = (w[s] * (np.log(w[s]) - logs[:, s])).sum(axis=1)
    feasible = kl <= r
    if not feasible.any():
        return -math.inf
    return float((pts[feasible] @ g).max())


@functools.lru_cache(maxsize=4)
def _grid_tables(grid: SimplexGrid) -> tuple[np.ndarray, np.ndarray]:
    pts = grid.points()
    with np.errstate(divide="ignore"):
        logs = np.log(pts)
    pts.flags.writeable = False
    logs.flags.writeable = False
    return pts, logs


# -- reverse ball ------------------------------------------------------------


def reverse_predictor(g, Pp, r: float) -> float:
    """Worst case over ``{P : KL(P, Pp) <= r}``.

    Only models absolutely continuous w.r.t. ``Pp`` are feasible, so costs of
    unobserved scenarios never matter. The optimum is an exponential tilt
    ``Q_theta ∝ Pp exp(theta g)`` with ``KL(Q_theta, Pp) = r``; ``KL`` grows
    monotonically in ``theta`` up to ``-log Pp(argmax)``.
    """
    g, w = _check(g, Pp)
    r = _check_rate(r)
    sup = w > 0
    gs, ws = g[sup], w[sup]
    mean = float(np.dot(ws, gs))
    top = gs.max()
    if r == 0.0 or top == gs.min():
        return mean
    mass_top = float(ws[gs == top].sum())
    if r >= -math.log(mass_top):
        return float(top)
    span = top - gs.min()
    z = (gs - top) / span

    def tilt(theta):
        lw = np.log(ws) + theta * z
        lw -= lw.max()
        q = np.exp(lw)
        q /= q.sum()
        return q

    def excess(theta):
        q = tilt(theta)
        s = q > 0
        return float(np.sum(q[s] * (np.log(q[s]) - np.log(ws[s])))) - r

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
    theta = brentq(excess, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(np.dot(tilt(theta), gs))


# -- small-rate approximations -----------------------------------------------


def markowitz_predictor(g, Pp, r: float) -> float:
    """Mean plus ``sqrt(2 r)`` empirical standard deviations."""
    g, w = _check(g, Pp)
    r = _check_rate(r)
    mean = float(np.dot(w, g))
    var = float(np.dot(w, g * g)) - mean * mean
    return mean + math.sqrt(max(var, 0.0)) * math.sqrt(2.0 * r)


@dataclass(frozen=True)
class PearsonSolution:
    value: float
    maximizer: np.ndarray
    interior: bool


def pearson_solution(g, Pp, r: float) -> PearsonSolution:
    """Maximize ``g . P`` over the simplex subject to ``chi2(Pp, P) <= 2 r``.

    Enumerates the set ``Z`` of coordinates forced to zero. For fixed ``Z``
    the problem on the free coordinates is a linear objective over an
    ellipsoid intersected with a hyperplane, solved in closed form; the best
    candidate that is feasible for the full problem is optimal.
    """
    g, w = _check(g, Pp)
    r = _check_rate(r)
    if np.any(w <= 0):
        raise DomainError("Pearson predictor needs a strictly positive estimator realization")
    d = g.size
    budget = 2.0 * r
    best = None
    for mask in range(1 << d):
        zero = np.array([(mask >> i) & 1 for i in range(d)], dtype=bool)
        free = ~zero
        if not free.any():
            continue
        c = w[free]
        gf = g[free]
        pz = float(w[zero].sum())
        W = 1.0 - pz
        rho = budget - pz
        base = pz * pz / W
        gbar = float(np.dot(c, gf)) / W
        V = float(np.dot(c, (gf - gbar) ** 2))
        # constant cost on the free set: V is pure round-off, use the flat solution
        if np.ptp(gf) <= 1e-12 * (1.0 + float(np.abs(g).max())):
            if base > rho * (1 + 1e-12) + 1e-15:
                continue
            x = c + c * pz / W
        else:
            if rho <= base:
                continue
            two_eta = math.sqrt(V / (rho - base))
            nu = gbar - two_eta * pz / W
            x = c + c * (gf - nu) / two_eta
        if np.any(x < -1e-12):
            continue
        P = np.zeros(d)
        P[free] = np.maximum(x, 0.0)
        val = float(np.dot(P, g))
        if best is None or val > best[0] + 1e-15:
            best = (val, P, mask == 0)
    if best is None:
        # the ball always contains Pp itself
        return PearsonSolution(float(np.dot(w, g)), w.copy(), True)
    val, P, interior = best
    interior = interior and bool(np.all(P > 0))
    return PearsonSolution(val, P, interior)


def pearson_predictor(g, Pp, r: float) -> float:
    g, w = _check(g, Pp)
    if g.max() == g.min():
        if np.any(w <= 0):
            raise DomainError("Pearson predictor needs a strictly positive estimator realization")
        return float(g[0])
    return pearson_solution(g, Pp, r).value


# -- dispatch and prescriptor ------------------------------------------------


def predict(g, Pp, kind: PredictorKind) -> float:
    if kind.name == "sample_average":
        return sample_average(g, Pp)
    if kind.name == "dro":
        return dro_predictor(g, Pp, kind.rate)[0]
    if kind.name == "reverse":
        return reverse_predictor(g, Pp, kind.rate)
    if kind.name == "markowitz":
        return markowitz_predictor(g, Pp, kind.rate)
    return pearson_predictor(g, Pp, kind.rate)


def predict_many(g, Pps: np.ndarray, kind: PredictorKind) -> np.ndarray:
    """Predictor values for each row of ``Pps``."""
    g = np.asarray(g, dtype=float).ravel()
    Pps = np.atleast_2d(np.asarray(Pps, dtype=float))
    if kind.name == "sample_average":
        return Pps @ g
    if kind.name == "dro":
        return dro_predictor_many(g, Pps, kind.rate)
    if kind.name == "markowitz":
        mean = Pps @ g
        var = np.maximum(Pps @ (g * g) - mean * mean, 0.0)
        return mean + np.sqrt(var) * math.sqrt(2.0 * kind.rate)
    fn = reverse_predictor if kind.name == "reverse" else pearson_predictor
    return np.array([fn(g, p, kind.rate) for p in Pps])


def prescriptor(C: CostMatrix | Sequence, Pp, kind: PredictorKind) -> tuple[int, float]:
    """Decision (0-based row) minimizing the predictor; ties go to the lowest row."""
    if not isinstance(C, CostMatrix):
        C = CostMatrix.from_rows(C)
    values = [predict(C.row(k), Pp, kind) for k in range(C.n)]
    k = int(np.argmin(values))
    return k, values[k]


def sample_complexity(d: int, r: float, beta: float) -> int:
    """Smallest ``T0`` with ``(T+1)^d exp(-r T) <= beta`` for every ``T >= T0``."""
    if not 0 < beta < 1:
        raise InputError(f"significance level must lie in (0, 1), got {beta!r}")
    if not r > 0:
        raise InputError("sample complexity needs a positive rate")
    log_beta = math.log(beta)

    def ok(T):
        return d * math.log1p(T) - r * T <= log_beta

    # the log-bound is concave in T and decreasing for T >= d / r - 1
    peak = max(1, math.ceil(d / r - 1))
    hi = peak
    while not ok(hi):
        hi *= 2
    lo = peak - 1 if peak > 1 else 0
    if ok(peak):
        T = peak
        while T > 1 and ok(T - 1):
            T -= 1
        return T
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
