import math
from fractions import Fraction

import numpy as np
import pytest

from kldro.divergences import entropy, relative_entropy
from kldro.errors import BudgetError, DomainError
from kldro.ldp import (
    CurvePoint, DisappointmentCurve, Halfspace, TypeClass, check_budget, disappointment_curve,
    enumerate_types, exact_disappointment, fit_decay_rate, log_multinomial, sanov_set_probability,
    strong_bound, type_array, type_probability, type_probability_exact,
)
from kldro.predictors import DRO, Pearson, SampleAverage
from kldro.simplex import Distribution


def binomial_cdf(k, T, p=Fraction(1, 2)):
    return sum(math.comb(T, j) * p**j * (1 - p) ** (T - j) for j in range(k + 1))


class TestTypes:
    def test_enumeration_examples(self):
        assert [t.counts for t in enumerate_types(2, 2)] == [(2, 0), (1, 1), (0, 2)]
        assert len(list(enumerate_types(3, 2))) == 6
        assert type_array(3, 100).shape == (5151, 3)
        assert len(type_array(3, 100)) <= 101**3

    def test_log_multiplicity_vs_factorials(self):
        for tc in enumerate_types(3, 20):
            exact = math.log(tc.multiplicity())
            assert tc.log_multiplicity == pytest.approx(exact, rel=1e-10, abs=1e-12)

    def test_counting_bounds(self):
        for d, T in [(2, 200), (3, 60), (4, 25)]:
            counts = type_array(d, T)
            H = np.array([entropy(c / T) for c in counts])
            logm = log_multinomial(counts)
            assert np.all(logm <= T * H + 1e-9)
            assert np.all(logm >= T * H - d * math.log(T + 1) - 1e-9)

    def test_type_probability_examples(self):
        P = Distribution([0.2, 0.3, 0.5])
        for i in range(3):
            tc = TypeClass(tuple(int(j == i) for j in range(3)), 1, 0.0)
            assert type_probability(tc, P) == pytest.approx(P[i], rel=1e-15)
        tc = next(t for t in enumerate_types(2, 2) if t.counts == (1, 1))
        assert type_probability(tc, [0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)
        assert type_probability_exact((1, 1), [Fraction(1, 2)] * 2) == Fraction(1, 2)
        assert type_probability(TypeClass((1, 1), 2, math.log(2)), [1.0, 0.0]) == 0.0

    def test_totality(self, rng):
        for d, T in [(3, 50), (4, 40), (2, 200)]:
            P = rng.dirichlet(np.ones(d))
            total = math.fsum(type_probability(t, P) for t in enumerate_types(d, T))
            assert total == pytest.approx(1.0, abs=1e-12)


class TestSanov:
    def test_whole_simplex(self):
        assert sanov_set_probability([0.3, 0.7], 15, Halfspace((0.0, 0.0), 0.0)).exact == pytest.approx(1.0, abs=1e-12)

    def test_binomial_tail(self):
        res = sanov_set_probability([0.5, 0.5], 20, Halfspace.parse("1,0>=0.75"))
        oracle = 1 - binomial_cdf(14, 20)
        assert res.exact == pytest.approx(float(oracle), rel=1e-12)
        assert res.exact == pytest.approx(0.02069473266601554, rel=1e-12)

    def test_bound(self):
        rate = relative_entropy([0.75, 0.25], [0.5, 0.5])
        assert rate == pytest.approx(0.13081, abs=1e-5)
        ev = Halfspace.parse("1,0>=0.75")
        for T in range(20, 201, 9):
            res = sanov_set_probability([0.5, 0.5], T, ev)
            assert res.exact <= (T + 1) ** 2 * math.exp(-T * rate)
            assert res.rate_bound == pytest.approx((T + 1) ** 2 * math.exp(-T * rate), rel=1e-9)


class TestDisappointment:
    def test_huge_rate(self):
        assert exact_disappointment([0.3, 0.7], [0, 1], DRO(50.0), 40) == 0.0

    @pytest.mark.parametrize("T", [1, 21, 101])
    def test_sample_average_odd_T(self, T):
        assert exact_disappointment([0.5, 0.5], [0, 1], SampleAverage, T, exact=True) == Fraction(1, 2)
        assert exact_disappointment([0.5, 0.5], [0, 1], SampleAverage, T) == pytest.approx(0.5, rel=1e-12)

    def test_sample_average_binomial(self):
        # P(mean < 3/4) under Bin(T, 3/4); dyadic so the float model is exact
        p = Fraction(3, 4)
        for T in (10, 33):
            oracle = sum(math.comb(T, k) * p**k * (1 - p) ** (T - k) for k in range(T + 1) if Fraction(k, T) < p)
            assert exact_disappointment([0.25, 0.75], [0, 1], SampleAverage, T, exact=True) == oracle
            assert exact_disappointment([0.25, 0.75], [0, 1], SampleAverage, T) == pytest.approx(float(oracle), rel=1e-12)

    def test_dro_regression_value(self):
        v = exact_disappointment([0.5, 0.5], [0, 1], DRO(0.1), 60)
        assert v <= 61**2 * math.exp(-6)
        assert v == pytest.approx(0.0001970216213630564, rel=1e-10)

    def test_monotone_in_rate(self):
        for T in (10, 40, 90):
            a = exact_disappointment([0.4, 0.6], [0, 1], DRO(0.05), T)
            b = exact_disappointment([0.4, 0.6], [0, 1], DRO(0.1), T)
            assert b <= a + 1e-12

    def test_prescriptor_union_bound(self):
        C = np.array([[0.0, 1.0], [0.6, 0.2], [1.0, 0.0]])
        P = [0.3, 0.7]
        for T in (5, 30, 80):
            presc = exact_disappointment(P, C, DRO(0.1), T)
            union = sum(exact_disappointment(P, row, DRO(0.1), T) for row in C)
            assert presc <= union + 1e-12
            assert presc <= strong_bound(2, 0.1, T)

    def test_pearson_fallback_counted(self):
        curve = disappointment_curve([0.5, 0.5], [0, 1], Pearson(0.1), [5, 6])
        # each T has the two vertex types on the boundary
        assert curve.fallback_count == 4
        assert all(0 <= e.exact_probability <= 1 for e in curve.entries)

    def test_curve_rows(self):
        curve = disappointment_curve([0.5, 0.5], [0, 1], DRO(0.1), range(1, 31))
        assert not curve.violations()
        for (T, p, b, lp), e in zip(curve.rows(), curve.entries):
            assert b == strong_bound(2, 0.1, T)
            assert lp == (math.log(p) if p > 0 else -math.inf)


class TestFit:
    def test_synthetic(self):
        assert fit_decay_rate([(T, math.exp(-0.2 * T)) for T in range(10, 60)]) == pytest.approx(-0.2, abs=1e-12)

    def test_window_and_zero(self):
        pts = [(T, math.exp(-0.3 * T)) for T in range(1, 50)]
        assert fit_decay_rate(pts, (20, 30)) == pytest.approx(-0.3, abs=1e-12)
        assert fit_decay_rate([(1, 0.0), (2, 0.0)]) == -math.inf
        with pytest.raises(DomainError):
            fit_decay_rate([(1, 0.5), (2, 0.0)])

    def test_constant_is_flat(self):
        curve = DisappointmentCurve(Distribution([0.5, 0.5]), SampleAverage, "", [CurvePoint(T, 0.5, 1.0) for T in range(3, 40, 2)])
        assert fit_decay_rate(curve) == 0.0

    def test_dro_feasibility(self):
        curve = disappointment_curve([0.5, 0.5], [0, 1], DRO(0.1), range(100, 301, 4))
        assert fit_decay_rate(curve) <= -0.1


def test_budget_guard():
    assert check_budget(3, range(1, 101)) == sum(math.comb(T + 2, 2) for T in range(1, 101))
    with pytest.raises(BudgetError) as exc:
        check_budget(4, range(1, 500))
    assert "--force" in str(exc.value) and exc.value.required > 10**7
    assert check_budget(4, range(1, 500), force=True) == exc.value.required
