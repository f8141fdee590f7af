"""Conic representations of the relative-entropy predictor, as checkers.

Nothing here solves a conic program. The module decides exponential-cone
membership, verifies that a dual certificate's worst-case distribution is a
feasible point of the exponential-cone formulation with the claimed
objective, evaluates the geometric-mean (second-order cone) form for
empirical distributions, and serializes both problem forms for external
solvers.

Interchange document (``dro-conic/v1``)::

    {
      "schema": "dro-conic/v1",
      "form": "exponential_cone" | "geometric_mean_socp",
      "d": int, "T": int (socp only), "r": str,
      "objective": [str, ...], "p_prime": [str, ...], "entropy": str (socp only),
      "variables": [...], "constraints": [...]
    }

Reals are written as ``repr`` strings, which round-trip doubles exactly.
The geometric-mean constraint is kept as a single ``geo_mean`` block; its
expansion into O(T) rotated second-order cones is left to the consumer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .divergences import entropy
from .errors import InputError
from .predictors import DualCertificate
from .simplex import as_weights

SCHEMA = "dro-conic/v1"
FORMS = ("exponential_cone", "geometric_mean_socp")


class ExpConePoint(NamedTuple):
    x: float
    y: float
    z: float


def exp_cone_member(p, tol: float = 1e-9) -> bool:
    """Membership in ``{z > 0, exp(x/z) <= y/z} ∪ {x <= 0, y >= 0, z = 0}``.

    The first branch is tested in the log domain, ``x/z <= log(y/z) + tol``.
    """
    if tol < 0:
        raise InputError("tolerance must be nonnegative")
    x, y, z = (float(v) for v in p)
    if z > 0:
        if y <= 0:
            return False
        return x / z <= math.log(y / z) + tol
    if abs(z) <= tol:
        return x <= tol and y >= -tol
    return False


@dataclass
class VerificationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)
    budget_slack: float = math.nan
    q: list[float] = field(default_factory=list)

    def summary(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations), "budget_slack": self.budget_slack}


def kl_epigraph(Pp, P) -> np.ndarray:
    """Smallest feasible ``Q(i) = Pp(i) log(Pp(i)/P(i))`` (``0`` where ``Pp(i)=0``)."""
    a, b = as_weights(Pp), as_weights(P)
    return _kl_epigraph_rows(a[None, :], b[None, :])[0]


def _kl_epigraph_rows(A: np.ndarray, P: np.ndarray) -> np.ndarray:
    q = np.zeros_like(A)
    s = A > 0
    with np.errstate(divide="ignore"):
        q[s] = A[s] * (np.log(A[s]) - np.log(P[s]))
    # subnormal products carry absolute rounding of half an ulp; round up so
    # the stored value still bounds the exact one
    sub = (q != 0) & (np.abs(q) < np.finfo(float).tiny)
    q[sub] = np.nextafter(q[sub], np.inf)
    return q


def verify_exp_cone_solution(g, Pp, r: float, cert: DualCertificate, tol: float = 1e-9) -> VerificationReport:
    """Check ``cert.worst_case`` against the exponential-cone program.

    Builds ``Q`` from the worst case, then checks every cone block
    ``(-Q(i), P(i), Pp(i))``, the budget row ``sum Q <= r``, the simplex rows
    and the objective value.
    """
    g = np.asarray(g, dtype=float)
    a = as_weights(Pp)
    P = cert.worst_case.weights
    viol = []
    if not (g.shape == a.shape == P.shape):
        return VerificationReport(False, ["dimension mismatch"])
    q = kl_epigraph(a, P)
    for i in range(a.size):
        if not np.isfinite(q[i]) or not exp_cone_member((-q[i], P[i], a[i]), tol):
            viol.append(f"cone block {i + 1}: (-Q, P, P') = ({-q[i]!r}, {P[i]!r}, {a[i]!r})")
    if np.any(P < -tol) or abs(math.fsum(P) - 1.0) > tol:
        viol.append("worst case is not in the simplex")
    total = math.fsum(q) if np.all(np.isfinite(q)) else math.inf
    if not total <= r + tol:
        viol.append(f"budget row: sum Q = {total!r} > r = {r!r}")
    obj = float(np.dot(P, g))
    if abs(obj - cert.primal_value) > tol:
        viol.append(f"objective {obj!r} differs from certified value {cert.primal_value!r}")
    return VerificationReport(not viol, viol, r - total, q.tolist())


def verify_exp_cone_many(g, Pps, r: float, worst_case, primal_value, tol: float = 1e-9) -> np.ndarray:
    """Row-wise :func:`verify_exp_cone_solution`; returns a boolean ``ok`` mask."""
    g = np.asarray(g, dtype=float)
    A = np.atleast_2d(np.asarray(Pps, dtype=float))
    P = np.atleast_2d(np.asarray(worst_case, dtype=float))
    q = _kl_epigraph_rows(A, P)
    # cone blocks (-Q, P, P'): first branch where P' > 0, second where P' = 0
    pos = A > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lhs = np.where(pos, -q / np.where(pos, A, 1.0), 0.0)
        rhs = np.where(pos & (P > 0), np.log(np.where(pos & (P > 0), P / np.where(pos, A, 1.0), 1.0)), -np.inf)
    cone = np.where(pos, np.isfinite(q) & (lhs <= rhs + tol), (-q <= tol) & (P >= -tol))
    ok = cone.all(axis=1)
    ok &= np.all(P >= -tol, axis=1) & (np.abs(P.sum(axis=1) - 1.0) <= tol)
    ok &= np.where(np.isfinite(q).all(axis=1), q.sum(axis=1), np.inf) <= r + tol
    ok &= np.abs(P @ g - np.asarray(primal_value, dtype=float)) <= tol
    return ok

def geometric_mean_certificate(P, Pp, r: float, T: int) -> bool:
    """``(prod P(i)^(T Pp(i)))^(1/T) >= exp(-(r + H(Pp)))`` for a type ``Pp``."""
    w, a = as_weights(P), as_weights(Pp)
    if w.shape != a.shape:
        raise InputError(f"dimension mismatch: {w.size} vs {a.size}")
    counts = T * a
    n = np.rint(counts)
    if T < 1 or np.any(np.abs(counts - n) > 1e-9 * max(T, 1)):
        raise InputError(f"{a.tolist()} is not an empirical distribution of {T} samples")
    n = n.astype(np.int64)
    used = n > 0
    if np.any(w[used] <= 0):
        return False
    # log of the geometric mean of the length-T vector with P(i) repeated n_i times
    log_gm = math.fsum(int(k) * math.log(p) for k, p in zip(n[used], w[used])) / T
    return log_gm >= -(r + entropy(a))


# -- problem interchange -----------------------------------------------------


@dataclass(frozen=True)
class ConicProblem:
    form: str
    objective: tuple[float, ...]
    p_prime: tuple[float, ...]
    r: float
    T: int | None = None
    entropy: float | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise InputError(f"unknown problem form {self.form!r}")
        object.__setattr__(self, "objective", tuple(float(v) for v in self.objective))
        object.__setattr__(self, "p_prime", tuple(float(v) for v in self.p_prime))
        if len(self.objective) != len(self.p_prime) or not self.objective:
            raise InputError("objective and p_prime must have the same positive length")
        if not self.r >= 0:
            raise InputError(f"rate must be nonnegative, got {self.r!r}")
        if self.form == "geometric_mean_socp":
            if self.T is None:
                raise InputError("the geometric-mean form needs T")
            counts = np.asarray(self.p_prime) * self.T
            if np.any(np.abs(counts - np.rint(counts)) > 1e-9 * self.T):
                raise InputError(f"p_prime is not an empirical distribution of {self.T} samples")
            if self.entropy is None:
                object.__setattr__(self, "entropy", entropy(np.asarray(self.p_prime)))

    @property
    def d(self) -> int:
        return len(self.objective)

    @classmethod
    def exponential(cls, g, Pp, r: float) -> "ConicProblem":
        return cls("exponential_cone", tuple(np.asarray(g, float)), tuple(as_weights(Pp)), float(r))

    @classmethod
    def socp(cls, g, Pp, r: float, T: int) -> "ConicProblem":
        return cls("geometric_mean_socp", tuple(np.asarray(g, float)), tuple(as_weights(Pp)), float(r), int(T))

    def constraints(self) -> list[dict]:
        d = self.d
        rows = [
            {"kind": "simplex_sum", "vars": [f"P{i + 1}" for i in range(d)], "rhs": "1.0"},
            {"kind": "nonneg", "vars": [f"P{i + 1}" for i in range(d)]},
        ]
        if self.form == "exponential_cone":
            rows.append({"kind": "budget", "vars": [f"Q{i + 1}" for i in range(d)], "rhs": repr(self.r)})
            for i in range(d):
                rows.append({"kind": "exp_cone", "args": [f"-Q{i + 1}", f"P{i + 1}", repr(self.p_prime[i])]})
        else:
            counts = [int(round(p * self.T)) for p in self.p_prime]
            rows.append({
                "kind": "geo_mean",
                "vars": [f"P{i + 1}" for i in range(d)],
                "multiplicity": counts,
                "rhs": repr(math.exp(-(self.r + self.entropy))),
            })
        return rows

    def variables(self) -> list[str]:
        names = [f"P{i + 1}" for i in range(self.d)]
        if self.form == "exponential_cone":
            names += [f"Q{i + 1}" for i in range(self.d)]
        return names


def serialize_problem(prob: ConicProblem) -> str:
    doc = {
        "schema": SCHEMA,
        "form": prob.form,
        "d": prob.d,
        "r": repr(prob.r),
        "sense": "maximize",
        "objective": [repr(v) for v in prob.objective],
        "p_prime": [repr(v) for v in prob.p_prime],
        "variables": prob.variables(),
        "constraints": prob.constraints(),
    }
    if prob.form == "geometric_mean_socp":
        doc["T"] = prob.T
        doc["entropy"] = repr(prob.entropy)
    return json.dumps(doc, indent=2, sort_keys=True)


def deserialize_problem(text: str) -> ConicProblem:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise InputError(f"unsupported schema {doc.get('schema')!r}")
    form = doc["form"]
    prob = ConicProblem(
        form,
        tuple(float(v) for v in doc["objective"]),
        tuple(float(v) for v in doc["p_prime"]),
        float(doc["r"]),
        doc.get("T"),
        float(doc["entropy"]) if "entropy" in doc else None,
    )
    if prob.d != doc["d"]:
        raise InputError(f"declared d={doc['d']} but objective has {prob.d} entries")
    return prob
