"""Distributions on a finite scenario set, simplex grids and ternary geometry.

Scenario ids are 1-based at every external boundary (files, CLI); arrays are
0-based internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import InputError

SUM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
SQRT3_2 = math.sqrt(3.0) / 2.0


class Distribution:
    """Immutable point of the probability simplex.

    Inputs whose total deviates from one by at most ``RENORMALIZE_TOL`` are
    renormalized; larger deviations are rejected.
    """

    __slots__ = ("_w",)

    def __init__(self, weights: Sequence[float] | np.ndarray):
        w = np.array(weights, dtype=float).ravel()
        if w.size < 1:
            raise InputError("distribution needs at least one scenario")
        if not np.all(np.isfinite(w)):
            raise InputError(f"non-finite weight in {w.tolist()}")
        if np.any(w < 0):
            raise InputError(f"negative weight in {w.tolist()}")
        total = math.fsum(w)
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise InputError(f"weights sum to {total!r}, not 1")
        if abs(total - 1.0) > SUM_TOL:
            w = w / total
        w.setflags(write=False)
        self._w = w

    @classmethod
    def _trusted(cls, w: np.ndarray) -> "Distribution":
        obj = cls.__new__(cls)
        w = np.asarray(w, dtype=float)
        w.setflags(write=False)
        obj._w = w
        return obj

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "Distribution":
        counts = [int(c) for c in counts]
        total = sum(counts)
        if total <= 0 or min(counts) < 0:
            raise InputError(f"invalid count vector {counts}")
        return cls._trusted(np.array([c / total for c in counts]))

    @classmethod
    def uniform(cls, d: int) -> "Distribution":
        return cls._trusted(np.full(d, 1.0 / d))

    @classmethod
    def point_mass(cls, d: int, i: int) -> "Distribution":
        """Point mass on the 1-based scenario ``i``."""
        w = np.zeros(d)
        w[i - 1] = 1.0
        return cls._trusted(w)

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def d(self) -> int:
        return self._w.size

    def __array__(self, dtype=None, copy=None):
        return self._w if dtype is None else self._w.astype(dtype)

    def __len__(self) -> int:
        return self._w.size

    def __getitem__(self, i):
        return self._w[i]

    def __iter__(self):
        return iter(self._w.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self._w, other._w)

    def __hash__(self) -> int:
        return hash(self._w.tobytes())

    def __repr__(self) -> str:
        return f"Distribution({self._w.tolist()!r})"

    def is_strictly_positive(self) -> bool:
        return bool(np.all(self._w > 0))

    def support(self) -> np.ndarray:
        return self._w > 0

    def is_type(self, T: int, tol: float = 1e-9) -> bool:
        """True if every ``T * P(i)`` is an integer (within ``tol``)."""
        scaled = self._w * T
        return bool(np.all(np.abs(scaled - np.round(scaled)) <= tol))


def as_weights(P) -> np.ndarray:
    if isinstance(P, Distribution):
        return P.weights
    return np.asarray(P, dtype=float)


@dataclass(frozen=True)
class CostMatrix:
    """Scenario costs for a finite list of decisions (one row per decision)."""

    entries: np.ndarray
    decision_labels: tuple[str, ...]

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim == 1:
            e = e[None, :]
        if e.ndim != 2 or e.shape[0] < 1 or e.shape[1] < 1:
            raise InputError(f"cost matrix must be n x d with n, d >= 1, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise InputError("cost matrix has non-finite entries")
        labels = tuple(str(s) for s in self.decision_labels)
        if len(labels) != e.shape[0]:
            raise InputError(f"{len(labels)} labels for {e.shape[0]} decision rows")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "decision_labels", labels)

    @classmethod
    def from_rows(cls, rows, labels=None) -> "CostMatrix":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if labels is None:
            labels = [f"x{i + 1}" for i in range(rows.shape[0])]
        return cls(rows, tuple(labels))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def d(self) -> int:
        return self.entries.shape[1]

    def row(self, k: int) -> np.ndarray:
        return self.entries[k]


def empirical_distribution(observations: Sequence[int], d: int) -> Distribution:
    """Observed frequencies of the 1-based scenario ids in ``observations``."""
    if d < 1:
        raise InputError(f"d must be positive, got {d}")
    obs = list(observations)
    if not obs:
        raise InputError("empty observation sequence")
    counts = [0] * d
    for k, i in enumerate(obs):
        if isinstance(i, bool) or int(i) != i or not 1 <= i <= d:
            raise InputError(f"observation #{k + 1}: scenario id {i!r} not in 1..{d}")
        counts[int(i) - 1] += 1
    T = len(obs)
    return Distribution._trusted(np.array([float(Fraction(c, T)) for c in counts]))


def empirical_counts(observations: Sequence[int], d: int) -> np.ndarray:
    P = empirical_distribution(observations, d)
    return np.rint(P.weights * len(observations)).astype(np.int64)


def expected_cost(g, P) -> float:
    g = np.asarray(g, dtype=float)
    w = as_weights(P)
    if g.shape != w.shape:
        raise InputError(f"cost vector has {g.size} entries, distribution has {w.size}")
    return float(np.dot(w, g))


@dataclass(frozen=True)
class SimplexGrid:
    d: int
    resolution: int

    def __post_init__(self):
        if self.d < 1:
            raise InputError(f"d must be positive, got {self.d}")
        if self.resolution < 1:
            raise InputError(f"resolution must be positive, got {self.resolution}")

    @property
    def size(self) -> int:
        return math.comb(self.resolution + self.d - 1, self.d - 1)

    def counts(self) -> np.ndarray:
        return composition_array(self.resolution, self.d)

    def points(self) -> np.ndarray:
        """All grid distributions as an ``(size, d)`` array."""
        return self.counts() / float(self.resolution)


def composition_array(total: int, d: int) -> np.ndarray:
    """Every nonnegative integer vector of length ``d`` summing to ``total``.

    Rows are in reverse-lexicographic order, starting at ``(total, 0, ..., 0)``.
    """
    if d < 1 or total < 0:
        raise InputError(f"no compositions of {total} into {d} parts")
    # tables[t] holds the compositions of t into k parts, for the current k
    tables = [np.array([[t]], dtype=np.int64) for t in range(total + 1)]
    for k in range(2, d + 1):
        ts = range(total + 1) if k < d else [total]
        new = {}
        for t in ts:
            blocks = []
            for first in range(t, -1, -1):
                rest = tables[t - first]
                blocks.append(np.column_stack([np.full(rest.shape[0], first, dtype=np.int64), rest]))
            new[t] = np.vstack(blocks)
        tables = new
    return tables[total]


def grid_enumerate(grid: SimplexGrid) -> Iterator[Distribution]:
    m = grid.resolution
    for c in grid.counts():
        yield Distribution._trusted(c / float(m))


class TernaryPoint(NamedTuple):
    u: float
    v: float


def ternary_embed(P) -> TernaryPoint:
    """Map a 3-scenario distribution to the plane.

    Vertices land at e1 -> (0, 0), e2 -> (1, 0), e3 -> (1/2, sqrt(3)/2).
    """
    w = as_weights(P)
    if w.size != 3:
        raise InputError(f"ternary embedding needs d = 3, got {w.size}")
    return TernaryPoint(float(w[1] + 0.5 * w[2]), float(SQRT3_2 * w[2]))


def ternary_unembed(pt: TernaryPoint) -> np.ndarray:
    u, v = pt
    p3 = v / SQRT3_2
    p2 = u - 0.5 * p3
    return np.array([1.0 - p2 - p3, p2, p3])


class BoundaryPoint(NamedTuple):
    point: Distribution
    on_face: bool


def _plane_directions(d: int, k: int) -> np.ndarray:
    if d == 2:
        base = np.array([[1.0, -1.0], [-1.0, 1.0]]) / math.sqrt(2.0)
        return base[np.arange(k) % 2]
    if d == 3:
        # orthonormal basis of the zero-sum plane; rotation by 2*pi/3 in this
        # basis is a cyclic relabelling of the scenarios
        ea = np.array([-1.0, 1.0, 0.0]) / math.sqrt(2.0)
        eb = np.array([-1.0, -1.0, 2.0]) / math.sqrt(6.0)
        theta = 2.0 * math.pi * np.arange(k) / k
        return np.cos(theta)[:, None] * ea + np.sin(theta)[:, None] * eb
    rng = np.random.default_rng(0)
    z = rng.standard_normal((k, d))
    z -= z.mean(axis=1, keepdims=True)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def ball_boundary(center, r: float, directions: int, tol: float = 1e-10) -> list[BoundaryPoint]:
    """Boundary samples of ``{P : KL(center, P) <= r}`` along rays from the center.

    Along each ray the divergence is convex and vanishes at the center, so it
    is monotone and bisection on the ray parameter is exact up to ``tol``.
    Rays that leave the simplex before the divergence reaches ``r`` return the
    face point with ``on_face=True``.
    """
    from .divergences import relative_entropy

    if not r > 0:
        raise InputError(f"ball radius must be positive, got {r!r}")
    if directions < 1:
        raise InputError(f"need at least one direction, got {directions}")
    c = as_weights(center)
    if not isinstance(center, Distribution):
        center = Distribution(c)
    out = []
    for u in _plane_directions(c.size, directions):
        neg = np.flatnonzero(u < -1e-15)

        def at(s):
            p = c + s * u
            p[p < 0] = 0.0
            return p

        if not neg.size:
            out.append(BoundaryPoint(center, False))
            continue
        ratios = -c[neg] / u[neg]
        s_face = float(ratios.min())
        face = at(s_face)
        face[neg[np.argmin(ratios)]] = 0.0
        face /= face.sum()
        if relative_entropy(center, face) <= r:
            out.append(BoundaryPoint(Distribution._trusted(face), True))
            continue
        hi = s_face
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if relative_entropy(center, at(mid)) <= r:
                lo = mid
            else:
                hi = mid
        p = at(lo)
        p /= p.sum()
        out.append(BoundaryPoint(Distribution._trusted(p), False))
    return out
