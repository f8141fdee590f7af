"""Exact sample-path probabilities by the method of types.

Every probability here is a finite sum over the empirical distributions
reachable with ``T`` samples, weighted by their multinomial probabilities.
No sampling is involved, so the large-deviation bounds become inequalities
that can be checked exactly at each ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .divergences import entropy, relative_entropy_from
from .errors import BudgetError, DomainError, InputError
from .predictors import PredictorKind, predict_many
from .simplex import CostMatrix, Distribution, SimplexGrid, as_weights, composition_array

CHUNK = 1 << 18
DEFAULT_BUDGET = 10_000_000

Event = Callable[[np.ndarray], np.ndarray]


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class TypeClass:
    counts: tuple[int, ...]
    T: int
    log_multiplicity: float

    @property
    def distribution(self) -> Distribution:
        return Distribution.from_counts(self.counts)

    def multiplicity(self) -> int:
        out = math.factorial(self.T)
        for c in self.counts:
            out //= math.factorial(c)
        return out


def type_count(d: int, T: int) -> int:
    return math.comb(T + d - 1, d - 1)


def log_multinomial(counts: np.ndarray) -> np.ndarray:
    """Log multinomial coefficients ``log(T! / prod counts!)`` row by row."""
    counts = np.asarray(counts, dtype=float)
    T = counts.sum(axis=-1)
    return gammaln(T + 1) - gammaln(counts + 1).sum(axis=-1)


def type_array(d: int, T: int) -> np.ndarray:
    """Count vectors of all types with ``T`` samples, shape ``(type_count, d)``."""
    if d < 1 or T < 1:
        raise InputError(f"need d >= 1 and T >= 1, got d={d}, T={T}")
    return composition_array(T, d)


def enumerate_types(d: int, T: int) -> Iterator[TypeClass]:
    counts = type_array(d, T)
    logm = log_multinomial(counts)
    for c, lm in zip(counts, logm):
        yield TypeClass(tuple(int(x) for x in c), T, float(lm))


def type_log_probabilities(counts: np.ndarray, P) -> np.ndarray:
    """Log-probability that the empirical counts equal each row of ``counts``."""
    w = as_weights(P)
    counts = np.atleast_2d(counts)
    if counts.shape[1] != w.size:
        raise InputError(f"types have {counts.shape[1]} scenarios, model has {w.size}")
    pos = w > 0
    out = log_multinomial(counts) + counts[:, pos] @ np.log(w[pos])
    impossible = np.any(counts[:, ~pos] > 0, axis=1)
    out[impossible] = -math.inf
    return out


def type_probability(tc: TypeClass, P) -> float:
    lp = type_log_probabilities(np.array([tc.counts]), P)[0]
    return math.exp(lp) if lp > -math.inf else 0.0


def type_probability_exact(counts: Sequence[int], P: Sequence[Fraction]) -> Fraction:
    """Rational probability of a type under a rational model."""
    T = sum(counts)
    out = Fraction(math.factorial(T))
    for c, p in zip(counts, P):
        out = out / math.factorial(c) * Fraction(p) ** c
    return out


# -- events ------------------------------------------------------------------


@dataclass(frozen=True)
class Halfspace:
    """The event ``{P : coef . P >= threshold}``."""

    coef: tuple[float, ...]
    threshold: float

    def __call__(self, dists: np.ndarray) -> np.ndarray:
        return np.atleast_2d(dists) @ np.asarray(self.coef, dtype=float) >= self.threshold

    @classmethod
    def parse(cls, text: str) -> "Halfspace":
        """Parse ``"a1,a2,...>=b"``."""
        lhs, sep, rhs = text.partition(">=")
        if not sep:
            raise InputError(f"event {text!r} is not of the form 'a1,...,ad>=b'")
        try:
            return cls(tuple(float(x) for x in lhs.split(",")), float(rhs))
        except ValueError as exc:
            raise InputError(f"cannot parse event {text!r}: {exc}") from None


class SanovResult(NamedTuple):
    exact: float
    rate_bound: float


def event_rate(P, event: Event, T: int | None = None, grid: int = 200) -> float:
    """Approximate ``inf {KL(Q, P) : Q in event}`` over event types and a grid.

    The minimum over a finite set of event points is an upper estimate of the
    infimum; it is exact whenever the infimum is attained on the grid or on a
    type (halfspaces with thresholds on the grid lattice).
    """
    w = as_weights(P)
    d = w.size
    pts = [SimplexGrid(d, grid).points()]
    if T is not None:
        pts.append(type_array(d, T) / float(T))
    best = math.inf
    for X in pts:
        inside = X[event(X)]
        if inside.size:
            best = min(best, float(relative_entropy_from(inside, w).min()))
    return best


def sanov_set_probability(P, T: int, event: Event, grid: int = 200) -> SanovResult:
    w = as_weights(P)
    counts = type_array(w.size, T)
    inside = event(counts / float(T))
    lp = type_log_probabilities(counts[inside], w)
    exact = min(math.fsum(np.exp(lp)), 1.0)
    rate = event_rate(w, event, T, grid)
    bound = math.exp(w.size * math.log1p(T) - T * rate) if math.isfinite(rate) else 0.0
    return SanovResult(exact, bound)


# -- disappointment ----------------------------------------------------------


class CurvePoint(NamedTuple):
    T: int
    exact_probability: float
    strong_bound: float


@dataclass
class DisappointmentCurve:
    model: Distribution
    predictor: PredictorKind
    context: str
    entries: list[CurvePoint] = field(default_factory=list)
    fallback_count: int = 0

    def violations(self) -> list[CurvePoint]:
        """Entries breaking the finite-sample bound (only meaningful for DRO)."""
        if self.predictor.name != "dro":
            return []
        return [e for e in self.entries if e.exact_probability > e.strong_bound]

    def rows(self) -> list[tuple[int, float, float, float]]:
        out = []
        for e in self.entries:
            lp = math.log(e.exact_probability) if e.exact_probability > 0 else -math.inf
            out.append((e.T, e.exact_probability, e.strong_bound, lp))
        return out


def strong_bound(d: int, r: float, T: int) -> float:
    """``(T+1)^d exp(-r T)``."""
    return math.exp(d * math.log1p(T) - r * T)


def _predictions(g, dists, kind):
    """Predictor values per type, plus how many used the DRO fallback."""
    if kind.name != "pearson":
        return predict_many(g, dists, kind), 0
    interior = np.all(dists > 0, axis=1)
    out = np.empty(dists.shape[0])
    if interior.any():
        out[interior] = predict_many(g, dists[interior], kind)
    if (~interior).any():
        out[~interior] = predict_many(g, dists[~interior], PredictorKind("dro", kind.rate))
    return out, int((~interior).sum())


def _disappointing_types(P, C: np.ndarray, kind: PredictorKind, counts: np.ndarray, prescribe: bool):
    """Boolean mask of types whose (chosen) decision is disappointed."""
    w = as_weights(P)
    dists = counts / float(counts[0].sum())
    true_cost = C @ w
    fallbacks = 0
    if not prescribe:
        pred, fallbacks = _predictions(C[0], dists, kind)
        return true_cost[0] > pred, fallbacks
    preds = np.empty((dists.shape[0], C.shape[0]))
    for k in range(C.shape[0]):
        preds[:, k], fb = _predictions(C[k], dists, kind)
        fallbacks += fb
    choice = np.argmin(preds, axis=1)
    chosen = preds[np.arange(choice.size), choice]
    return true_cost[choice] > chosen, fallbacks


def _as_costs(g) -> tuple[np.ndarray, bool]:
    if isinstance(g, CostMatrix):
        return np.asarray(g.entries), True
    arr = np.asarray(g, dtype=float)
    if arr.ndim == 2:
        return arr, True
    return arr[None, :], False


def exact_disappointment(P, g, kind: PredictorKind, T: int, *, exact: bool = False):
    """Probability that the true cost strictly exceeds the predicted cost.

    ``g`` is a cost vector (prediction disappointment) or a :class:`CostMatrix`
    / 2-D array (prescription disappointment of the induced prescriptor). With
    ``exact=True`` the model is read as exact binary rationals and the sum is
    returned as a :class:`~fractions.Fraction`.
    """
    value, _ = _disappointment(P, g, kind, T, exact=exact)
    return value


class _RationalModel:
    """Integer arithmetic for ``sum_types multinomial * prod P_i^c_i``."""

    def __init__(self, w: np.ndarray, T: int):
        fr = [Fraction(float(x)) for x in w]
        self.D = math.lcm(*(f.denominator for f in fr))
        nums = [f.numerator * (self.D // f.denominator) for f in fr]
        self.T = T
        self.fact = [1] * (T + 1)
        for k in range(1, T + 1):
            self.fact[k] = self.fact[k - 1] * k
        self.pows = [[n ** c for c in range(T + 1)] for n in nums]

    def total(self, counts: np.ndarray) -> Fraction:
        S = 0
        for row in counts.tolist():
            term = self.fact[self.T]
            for c in row:
                term //= self.fact[c]
            for i, c in enumerate(row):
                term *= self.pows[i][c]
            S += term
        return Fraction(S, self.D ** self.T)


def _disappointment(P, g, kind, T, exact=False):
    w = as_weights(P)
    C, prescribe = _as_costs(g)
    if C.shape[1] != w.size:
        raise InputError(f"costs have {C.shape[1]} scenarios, model has {w.size}")
    counts = type_array(w.size, T)
    fallbacks = 0
    hits = []
    for start in range(0, counts.shape[0], CHUNK):
        block = counts[start:start + CHUNK]
        mask, fb = _disappointing_types(w, C, kind, block, prescribe)
        fallbacks += fb
        hits.append(block[mask])
    hits = np.vstack(hits)
    if exact:
        return _RationalModel(w, T).total(hits), fallbacks
    lp = type_log_probabilities(hits, w)
    return min(math.fsum(np.exp(lp)), 1.0), fallbacks


def disappointment_curve(P, g, kind: PredictorKind, Ts: Iterable[int], context: str = "", *, exact: bool = False) -> DisappointmentCurve:
    """Exact disappointment at each ``T``; ``exact=True`` sums in rational arithmetic."""
    w = as_weights(P)
    model = P if isinstance(P, Distribution) else Distribution(w)
    curve = DisappointmentCurve(model, kind, context)
    for T in Ts:
        p, fb = _disappointment(w, g, kind, int(T), exact=exact)
        curve.fallback_count += fb
        curve.entries.append(CurvePoint(int(T), float(p), strong_bound(w.size, kind.rate, int(T))))
    return curve


def enumeration_cost(d: int, Ts: Iterable[int]) -> int:
    return sum(type_count(d, int(T)) for T in Ts)


def check_budget(d: int, Ts: Iterable[int], budget: int = DEFAULT_BUDGET, force: bool = False) -> int:
    need = enumeration_cost(d, Ts)
    if need > budget and not force:
        raise BudgetError(need, budget)
    return need


def fit_decay_rate(curve: DisappointmentCurve | Sequence[tuple[int, float]], window: tuple[int, int] | None = None) -> float:
    """Least-squares slope of ``log p_T`` against ``T`` (nats per sample).

    Only entries with positive probability enter the fit. A window whose
    probabilities are all zero has slope ``-inf``.
    """
    if isinstance(curve, DisappointmentCurve):
        pts = [(e.T, e.exact_probability) for e in curve.entries]
    else:
        pts = [(int(t), float(p)) for t, p in curve]
    if window is not None:
        lo, hi = window
        pts = [(t, p) for t, p in pts if lo <= t <= hi]
    if pts and all(p == 0 for _, p in pts):
        return -math.inf
    pos = [(t, p) for t, p in pts if p > 0]
    if len(pos) < 2:
        raise DomainError(f"decay-rate fit needs two positive entries, got {len(pos)}")
    x = np.array([t for t, _ in pos], dtype=float)
    y = np.log([p for _, p in pos])
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.dot(xc, yc) / np.dot(xc, xc))
