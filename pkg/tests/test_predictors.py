import math

import numpy as np
import pytest
from scipy.optimize import brentq

from kldro.conic import verify_exp_cone_solution
from kldro.divergences import relative_entropy
from kldro.errors import DomainError, InputError
from kldro.predictors import (
    DRO, Markowitz, Pearson, PredictorKind, ReverseDRO, SampleAverage, dro_brute_force,
    dro_predictor, dro_predictor_many, markowitz_predictor, pearson_predictor, pearson_solution,
    predict, prescriptor, reverse_predictor, sample_average, sample_complexity,
)
from kldro.simplex import CostMatrix, SimplexGrid


def kl_ball_two_point(a, r):
    """max P(2) over {P : KL((1-a, a), P) <= r}, by root finding on P(2)."""
    f = lambda p: relative_entropy([1 - a, a], [1 - p, p]) - r
    if f(1 - 1e-300) <= 0:
        return 1.0
    return brentq(f, a, 1.0 - 1e-300 if a < 1 else 1.0, xtol=1e-15)


class TestPredictorKind:
    def test_parse(self):
        assert PredictorKind.parse("dro:0.2") == DRO(0.2)
        assert PredictorKind.parse("dro", 0.1) == DRO(0.1)
        assert PredictorKind.parse("saa") == SampleAverage
        assert PredictorKind.parse("Pearson:0.01") == Pearson(0.01)

    @pytest.mark.parametrize("text", ["foo", "dro:-1", "dro:nan"])
    def test_parse_errors(self, text):
        with pytest.raises(InputError):
            PredictorKind.parse(text)


def test_sample_average():
    assert sample_average([0, 1], [0.5, 0.5]) == 0.5
    assert sample_average([3, 7, 9], [0, 1, 0]) == 7
    assert sample_average([1, 0, 0], [2 / 36, 17 / 36, 17 / 36]) == pytest.approx(2 / 36, abs=1e-16)


class TestDRO:
    def test_rate_zero_is_sample_average(self, rng):
        for _ in range(50):
            g, a = rng.normal(size=3), rng.dirichlet(np.ones(3))
            assert dro_predictor(g, a, 0.0)[0] == sample_average(g, a)

    def test_vertex_center(self):
        v, cert = dro_predictor([1, 0, 0], [1, 0, 0], 0.05)
        assert v == 1.0
        assert not cert.problems([1, 0, 0])

    def test_unobserved_scenario(self):
        v, cert = dro_predictor([0, 1], [1, 0], 0.05)
        assert v == pytest.approx(-math.expm1(-0.05), abs=1e-12)
        assert v == pytest.approx(0.04877057549928599, abs=1e-15)
        np.testing.assert_allclose(cert.worst_case.weights, [math.exp(-0.05), -math.expm1(-0.05)], atol=1e-12)

    @pytest.mark.parametrize("a", [0.0, 0.1, 0.5, 0.93])
    @pytest.mark.parametrize("r", [1e-4, 0.05, 0.5, 3.0])
    def test_two_point_oracle(self, a, r):
        v, cert = dro_predictor([0, 1], [1 - a, a], r)
        assert v == pytest.approx(kl_ball_two_point(a, r), abs=1e-9)
        assert not cert.problems([0, 1])

    def test_constant_cost(self):
        assert dro_predictor([2.5, 2.5, 2.5], [0.2, 0.3, 0.5], 0.7)[0] == 2.5

    def test_large_rate_approaches_max(self, rng):
        for _ in range(20):
            g, a = rng.normal(size=4), rng.dirichlet(np.ones(4))
            assert g.max() - dro_predictor(g, a, 50.0)[0] <= 1e-3

    def test_certificates_verify(self, rng):
        for k in range(100):
            d = 2 + k % 3
            g, a = rng.normal(size=d), rng.dirichlet(np.ones(d))
            if k % 2:
                a[rng.integers(d)] = 0
                a /= a.sum()
            r = float(rng.uniform(0, 2))
            _, cert = dro_predictor(g, a, r)
            assert not cert.problems(g)
            assert verify_exp_cone_solution(g, a, r, cert).ok

    def test_batch_solver_matches_scalar(self, rng):
        g = rng.normal(size=3)
        Pps = rng.dirichlet(np.ones(3), size=50)
        Pps[::5, 0] = 0
        Pps /= Pps.sum(axis=1, keepdims=True)
        batch = dro_predictor_many(g, Pps, 0.2)
        scalar = [dro_predictor(g, p, 0.2)[0] for p in Pps]
        np.testing.assert_allclose(batch, scalar, atol=1e-9, rtol=0)

    def test_brute_force_examples(self, rng):
        grid = SimplexGrid(3, 50)
        assert dro_brute_force([0.1, 0.4, 0.9], [0.2, 0.4, 0.4], 0.0, grid) == pytest.approx(sample_average([0.1, 0.4, 0.9], [0.2, 0.4, 0.4]))
        assert dro_brute_force([1.5, 1.5, 1.5], [0.2, 0.4, 0.4], 0.1, grid) == pytest.approx(1.5, abs=1e-15)

    def test_unobserved_sensitivity(self):
        a = [0.6, 0.4, 0.0]
        lo, hi = dro_predictor([0, 1, 2], a, 0.1)[0], dro_predictor([0, 1, 3], a, 0.1)[0]
        assert hi > lo
        assert reverse_predictor([0, 1, 2], a, 0.1) == reverse_predictor([0, 1, 3], a, 0.1)

    def test_errors(self):
        with pytest.raises(InputError):
            dro_predictor([0, 1], [1, 0, 0], 0.1)
        with pytest.raises(InputError):
            dro_predictor([0, float("nan")], [0.5, 0.5], 0.1)
        with pytest.raises(InputError):
            dro_predictor([0, 1], [0.5, 0.5], -0.1)


class TestReverse:
    def test_examples(self):
        assert reverse_predictor([0, 1], [0.3, 0.7], 0.0) == pytest.approx(0.7, abs=1e-15)
        for r in (0.01, 1.0, 10.0):
            assert reverse_predictor([0, 1], [1, 0], r) == 0.0
        assert reverse_predictor([4, 4, 4], [0.2, 0.3, 0.5], 0.3) == pytest.approx(4.0, abs=1e-12)

    def test_tilt_attains_budget(self):
        a, g, r = np.array([0.5, 0.3, 0.2]), np.array([0.0, 1.0, 2.0]), 0.05
        v = reverse_predictor(g, a, r)
        assert sample_average(g, a) < v < g.max()
        # the worst case is an exponential tilt of a with KL(Q, a) = r
        theta = brentq(lambda t: relative_entropy(a * np.exp(t * g) / (a @ np.exp(t * g)), a) - r, 0, 50)
        Q = a * np.exp(theta * g)
        assert v == pytest.approx(Q @ g / Q.sum(), abs=1e-9)

    def test_saturates_at_observed_max(self):
        assert reverse_predictor([0, 1, 5], [0.5, 0.5, 0], 5.0) == 1.0


class TestQuadratic:
    def test_markowitz(self):
        assert markowitz_predictor([2, 2], [0.3, 0.7], 0.5) == 2.0
        assert markowitz_predictor([0, 1], [0.5, 0.5], 0.02) == pytest.approx(0.6, abs=1e-15)

    def test_pearson_interior(self):
        sol = pearson_solution([0, 1], [0.5, 0.5], 0.02)
        assert sol.interior
        np.testing.assert_allclose(sol.maximizer, [0.4, 0.6], atol=1e-12)
        assert sol.value == pytest.approx(markowitz_predictor([0, 1], [0.5, 0.5], 0.02), abs=1e-12)

    def test_pearson_capped(self):
        sol = pearson_solution([0, 1], [0.5, 0.5], 1.0)
        assert not sol.interior
        assert sol.value == pytest.approx(1.0, abs=1e-12)
        assert markowitz_predictor([0, 1], [0.5, 0.5], 1.0) > 1.0

    def test_pearson_brute_force(self, rng):
        pts = SimplexGrid(3, 300).points()
        for _ in range(20):
            g, a = rng.normal(size=3), rng.dirichlet(np.ones(3)) * 0.9 + 0.1 / 3
            r = float(rng.uniform(0.01, 1.0))
            chi2 = ((pts - a) ** 2 / a).sum(axis=1)
            vb = (pts[chi2 <= 2 * r] @ g).max()
            v = pearson_predictor(g, a, r)
            assert vb <= v + 1e-9
            assert v - vb <= (g.max() - g.min()) * 3 / 300

    def test_pearson_domain(self):
        with pytest.raises(DomainError):
            pearson_predictor([0, 1], [1, 0], 0.1)
        assert pearson_predictor([3, 3, 3], [0.2, 0.3, 0.5], 0.4) == pytest.approx(3.0, abs=1e-12)


class TestPrescriptor:
    def test_single_row(self):
        assert prescriptor([[0.3, 0.2]], [0.5, 0.5], DRO(0.1))[0] == 0

    def test_examples(self):
        C = CostMatrix.from_rows([[0, 1], [1, 0]])
        assert prescriptor(C, [1, 0], DRO(0.0)) == (0, 0.0)
        k, v = prescriptor(C, [1, 0], DRO(0.05))
        assert k == 0 and v == pytest.approx(-math.expm1(-0.05), abs=1e-12)

    def test_ties_lowest_index(self):
        assert prescriptor([[1, 1], [0.5, 1.5], [1, 1]], [0.5, 0.5], SampleAverage)[0] == 0

    def test_value_matches_predictor(self, rng):
        C = rng.normal(size=(4, 3))
        a = rng.dirichlet(np.ones(3))
        for kind in (SampleAverage, DRO(0.1), ReverseDRO(0.1), Markowitz(0.1), Pearson(0.1)):
            k, v = prescriptor(C, a, kind)
            vals = [predict(row, a, kind) for row in C]
            assert v == vals[k] == min(vals)


def test_sample_complexity():
    # first T with (T+1)^2 e^{-0.1 T} <= 0.05, scanning directly
    assert sample_complexity(2, 0.1, 0.05) == 127
    T0 = sample_complexity(3, 0.05, 0.01)
    bound = lambda T: 3 * math.log1p(T) - 0.05 * T
    assert bound(T0) <= math.log(0.01) < bound(T0 - 1)
    assert all(bound(T) <= math.log(0.01) for T in range(T0, T0 + 5000))


class TestBatchCertificates:
    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("r", [0.0, 1e-6, 0.05, 1.0, 8.0])
    def test_agree_with_scalar(self, rng, d, r):
        from kldro.conic import verify_exp_cone_many
        from kldro.ldp import type_array
        from kldro.predictors import dro_certificates_many

        Pps = type_array(d, 10) / 10.0
        g = rng.normal(size=d)
        for gg in (g, np.r_[g.max() + 1, g[1:]], np.r_[np.zeros(d - 1), 1.0]):
            v, cert = dro_certificates_many(gg, Pps, r)
            assert not cert.failures(gg).any()
            assert verify_exp_cone_many(gg, Pps, r, cert.worst_case, cert.primal_value).all()
            np.testing.assert_array_equal(v, dro_predictor_many(gg, Pps, r))
            for k in rng.integers(0, len(Pps), 8):
                assert v[k] == pytest.approx(dro_predictor(gg, Pps[k], r)[0], abs=1e-9)
                assert verify_exp_cone_solution(gg, Pps[k], r, cert[k]).ok

    def test_perturbation_detected(self):
        from kldro.conic import verify_exp_cone_many
        from kldro.predictors import dro_certificates_many

        Pps = np.array([[0.5, 0.3, 0.2], [0.2, 0.2, 0.6]])
        g = np.array([0.0, 1.0, 2.0])
        _, cert = dro_certificates_many(g, Pps, 0.1)
        W = cert.worst_case.copy()
        W[:, 0] -= 1e-3
        W[:, 2] += 1e-3
        assert not verify_exp_cone_many(g, Pps, 0.1, W, W @ g).any()
