"""Property suites behind ``kldro validate``.

Each suite draws random instances from a seeded generator, checks one family
of invariants and returns a :class:`SuiteResult` with counts and the worst
residual seen. Budgets are sized so the whole run stays well under a minute
on one core.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import conic, divergences as dv, ldp, predictors as pr
from .simplex import Distribution, SimplexGrid


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: int = 0
    worst_residual: float = 0.0
    notes: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, residual: float = 0.0, note: str | None = None):
        self.checks += 1
        if not ok:
            self.failures += 1
            if note and len(self.notes) < 5:
                self.notes.append(note)
        if math.isfinite(residual):
            self.worst_residual = max(self.worst_residual, abs(float(residual)))

    def summary(self) -> dict:
        return {
            "suite": self.name,
            "checks": self.checks,
            "failures": self.failures,
            "worst_residual": self.worst_residual,
            "passed": self.passed,
            "notes": self.notes,
        }


def _dirichlet(rng, d, zeros=False):
    p = rng.dirichlet(np.ones(d))
    if zeros and d > 1:
        k = rng.integers(1, d)
        p[rng.choice(d, size=k, replace=False)] = 0.0
        if p.sum() == 0:
            p[rng.integers(d)] = 1.0
        p /= p.sum()
    return p


def suite_divergences(rng, n: int = 2000) -> SuiteResult:
    res = SuiteResult("divergences")
    for _ in range(n):
        d = int(rng.integers(2, 6))
        a, b = _dirichlet(rng, d), _dirichlet(rng, d)
        kl = dv.relative_entropy(a, b)
        res.record(kl >= 0, 0.0, f"negative KL {kl!r}")
        lam = rng.uniform()
        a2, b2 = _dirichlet(rng, d), _dirichlet(rng, d)
        lhs = dv.relative_entropy(lam * a + (1 - lam) * a2, lam * b + (1 - lam) * b2)
        rhs = lam * kl + (1 - lam) * dv.relative_entropy(a2, b2)
        res.record(lhs <= rhs + 1e-9, max(lhs - rhs, 0.0), "joint convexity")
    for _ in range(20):
        d = int(rng.integers(2, 5))
        a = _dirichlet(rng, d) * 0.9 + 0.1 / d
        F = dv.observed_fisher(a)
        Ffd = dv.fisher_finite_difference(a)
        err = float(np.max(np.abs(Ffd - F)) / np.max(np.abs(F)))
        res.record(err <= 1e-5, err, "finite-difference Fisher")
        u = rng.standard_normal(d)
        u -= u.mean()
        u /= np.linalg.norm(u)
        ratios = []
        for k in range(4, 12):
            eps = 2.0 ** -k * a.min()
            _, _, gap = dv.taylor_gap(a, a + eps * u)
            ratios.append(abs(gap) / eps**2)
        res.record(ratios[-1] <= 0.1 * ratios[0], ratios[-1], "taylor gap trend")
    return res


def suite_brute_force(rng, n: int = 60, m: int = 200) -> SuiteResult:
    res = SuiteResult("brute_force")
    grid = SimplexGrid(3, m)
    for k in range(n):
        g = rng.normal(size=3)
        a = _dirichlet(rng, 3, zeros=(k % 3 == 0))
        r = float(rng.uniform(0.001, 1.0))
        v, _ = pr.dro_predictor(g, a, r)
        vb = pr.dro_brute_force(g, a, r, grid)
        tol = (g.max() - g.min()) * 3 / m + 1e-9
        res.record(vb <= v + 1e-9 and v - vb <= tol, v - vb, f"dro {v!r} vs grid {vb!r}")
        vm = float(pr.dro_predictor_many(g, a[None], r)[0])
        res.record(abs(vm - v) <= 1e-9, vm - v, "batch solver disagrees")
    return res


def suite_certificates(rng, n: int = 300, n_gm: int = 2000, inject_fault: bool = False) -> SuiteResult:
    res = SuiteResult("conic_certificates")
    for k in range(n):
        d = int(rng.integers(2, 5))
        g = rng.normal(size=d)
        a = _dirichlet(rng, d, zeros=(k % 4 == 0))
        r = float(rng.choice([0.0, rng.uniform(0, 2)]))
        _, cert = pr.dro_predictor(g, a, r)
        if inject_fault:
            P = cert.worst_case.weights.copy()
            j = int(np.argmax(g))
            i = int(np.argmin(np.where(P > 0, g, np.inf)))
            shift = min(1e-3, P[i])
            P[i] -= shift
            P[j] += shift
            cert = replace(cert, worst_case=Distribution._trusted(P / P.sum()))
        report = conic.verify_exp_cone_solution(g, a, r, cert)
        res.record(report.ok, -min(report.budget_slack, 0.0), "; ".join(report.violations))
        res.record(not cert.problems(g) or inject_fault, 0.0, "; ".join(cert.problems(g)))
    skipped = 0
    for _ in range(n_gm):
        d = int(rng.integers(2, 5))
        T = int(rng.integers(1, 51))
        counts = rng.multinomial(T, _dirichlet(rng, d))
        a = counts / T
        P = _dirichlet(rng, d, zeros=rng.uniform() < 0.1)
        kl = dv.relative_entropy(a, P)
        r = float(kl * rng.uniform(0.5, 1.5)) if math.isfinite(kl) else float(rng.uniform(0, 1))
        if abs(kl - r) <= 1e-12:
            skipped += 1
            continue
        res.record(conic.geometric_mean_certificate(P, a, r, T) == (kl <= r), 0.0, "geometric-mean equivalence")
    if skipped:
        res.notes.append(f"{skipped} boundary instances excluded")
    return res


def suite_rate_expansion(rng, n: int = 20) -> SuiteResult:
    res = SuiteResult("rate_expansion")
    for _ in range(n):
        d = int(rng.integers(2, 5))
        g = rng.normal(size=d)
        a = _dirichlet(rng, d) * 0.8 + 0.2 / d
        mean = float(a @ g)
        std = math.sqrt(float(a @ (g - mean) ** 2))
        ratios = [(pr.dro_predictor(g, a, r)[0] - mean) / (math.sqrt(2 * r) * std) for r in (1e-2, 1e-3, 1e-4, 1e-5)]
        res.record(abs(ratios[-1] - 1) <= 0.02, ratios[-1] - 1, f"ratio {ratios[-1]!r}")
        res.record(abs(ratios[-1] - 1) <= abs(ratios[0] - 1) + 1e-12, ratios[-1] - 1, "ratios not converging")
        sol = pr.pearson_solution(g, a, 1e-5)
        mk = pr.markowitz_predictor(g, a, 1e-5)
        if sol.interior:
            res.record(abs(sol.value - mk) <= 1e-10, sol.value - mk, "pearson vs markowitz")
    return res


def suite_types(rng, n: int = 20) -> SuiteResult:
    res = SuiteResult("type_sums")
    for _ in range(n):
        d = int(rng.integers(1, 5))
        T = int(rng.integers(1, 60))
        P = _dirichlet(rng, d, zeros=rng.uniform() < 0.3)
        counts = ldp.type_array(d, T)
        total = math.fsum(np.exp(ldp.type_log_probabilities(counts, P)))
        res.record(abs(total - 1) <= 1e-12, total - 1, f"total probability {total!r}")
        logm = ldp.log_multinomial(counts)
        H = np.array([dv.entropy(c / T) for c in counts])
        ok = np.all(logm <= T * H + 1e-9) and np.all(logm >= T * H - d * math.log(T + 1) - 1e-9)
        res.record(bool(ok), 0.0, "counting bounds")
    return res


def suite_finite_sample(rng, n: int = 6, t_max: int = 80) -> SuiteResult:
    res = SuiteResult("finite_sample")
    for _ in range(n):
        d = int(rng.integers(2, 4))
        P = _dirichlet(rng, d)
        g = rng.normal(size=d)
        r = float(rng.uniform(0.02, 0.3))
        curve = ldp.disappointment_curve(P, g, pr.DRO(r), range(1, t_max + 1, 3))
        for e in curve.entries:
            res.record(e.exact_probability <= e.strong_bound, max(e.exact_probability - e.strong_bound, 0.0), f"T={e.T}")
        C = np.vstack([g, rng.normal(size=d)])
        for T in range(1, t_max + 1, 13):
            presc = ldp.exact_disappointment(P, C, pr.DRO(r), T)
            union = sum(ldp.exact_disappointment(P, row, pr.DRO(r), T) for row in C)
            res.record(presc <= ldp.strong_bound(d, r, T), 0.0, f"prescriptor bound T={T}")
            res.record(presc <= union + 1e-12, presc - union, "union bound")
    return res


def run_all(seed: int = 0, inject_fault: bool = False) -> list[SuiteResult]:
    suites = [
        ("divergences", lambda rng: suite_divergences(rng)),
        ("brute_force", lambda rng: suite_brute_force(rng)),
        ("conic_certificates", lambda rng: suite_certificates(rng, inject_fault=inject_fault)),
        ("rate_expansion", lambda rng: suite_rate_expansion(rng)),
        ("type_sums", lambda rng: suite_types(rng)),
        ("finite_sample", lambda rng: suite_finite_sample(rng)),
    ]
    out = []
    for k, (_, fn) in enumerate(suites):
        rng = np.random.default_rng([seed, k])
        t0 = time.perf_counter()
        res = fn(rng)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
