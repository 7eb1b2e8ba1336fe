import math

import numpy as np
import pytest
from scipy import integrate

from nenona.stats import (
    BothZeroVariance,
    TooFewSamples,
    ZeroPooledVariance,
    cohens_d,
    format_report,
    student_t_cdf,
    welch_t_test,
)


def reference_welch(a, b):
    """Textbook-formula oracle, computed independently of the implementation."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    na, nb = len(a), len(b)
    va, vb = a.var(ddof=1), b.var(ddof=1)
    t = (a.mean() - b.mean()) / math.sqrt(va / na + vb / nb)
    df = (va / na + vb / nb) ** 2 / ((va / na) ** 2 / (na - 1)
                                     + (vb / nb) ** 2 / (nb - 1))
    return t, df


def t_density(x, df):
    c = math.gamma((df + 1) / 2) / (math.sqrt(df * math.pi) * math.gamma(df / 2))
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


class TestWelchTTest:
    def test_identical_groups(self):
        r = welch_t_test([1, 2, 3], [1, 2, 3])
        assert r.t_statistic == 0.0
        assert r.p_value == pytest.approx(1.0)

    def test_matches_reference_formula(self):
        a = [1.1, 2.3, 0.9, 1.8]
        b = [3.2, 2.9, 3.9]
        r = welch_t_test(a, b)
        t_ref, df_ref = reference_welch(a, b)
        assert r.t_statistic == pytest.approx(t_ref, abs=1e-6)
        assert r.degrees_of_freedom == pytest.approx(df_ref, abs=1e-6)
        p_ref = 2 * integrate.quad(t_density, abs(t_ref), np.inf, args=(df_ref,))[0]
        assert r.p_value == pytest.approx(p_ref, abs=1e-8)

    def test_both_zero_variance(self):
        with pytest.raises(BothZeroVariance):
            welch_t_test([0, 0, 0], [0, 0, 0])

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            welch_t_test([1.0], [1.0, 2.0])

    def test_random_samples_match_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.normal(size=rng.integers(3, 9))
            b = rng.normal(loc=rng.normal(), size=rng.integers(3, 9))
            r = welch_t_test(a, b)
            t_ref, df_ref = reference_welch(a, b)
            assert r.t_statistic == pytest.approx(t_ref, abs=1e-6)
            assert r.degrees_of_freedom == pytest.approx(df_ref, abs=1e-6)

    def test_sign_antisymmetry(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=6), rng.normal(loc=1.0, size=5)
        r1, r2 = welch_t_test(a, b), welch_t_test(b, a)
        assert r1.t_statistic == -r2.t_statistic
        assert r1.cohens_d == -r2.cohens_d
        assert r1.p_value == r2.p_value
        assert r1.degrees_of_freedom == r2.degrees_of_freedom

    def test_shift_invariance(self):
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=7), rng.normal(size=8)
        r1, r2 = welch_t_test(a, b), welch_t_test(a + 17.0, b + 17.0)
        assert r1.t_statistic == pytest.approx(r2.t_statistic, abs=1e-12)
        assert r1.p_value == pytest.approx(r2.p_value, abs=1e-12)
        assert r1.cohens_d == pytest.approx(r2.cohens_d, abs=1e-12)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=7), rng.normal(size=8)
        r1, r2 = welch_t_test(a, b), welch_t_test(3.7 * a, 3.7 * b)
        assert r1.t_statistic == pytest.approx(r2.t_statistic, abs=1e-12)
        assert r1.p_value == pytest.approx(r2.p_value, abs=1e-12)
        assert r1.cohens_d == pytest.approx(r2.cohens_d, abs=1e-12)


class TestTCdf:
    @pytest.mark.parametrize("df", [1.0, 5.0, 10.37, 20.0])
    def test_matches_numerical_integration(self, df):
        for x in (-3.0, -1.2, 0.0, 0.5, 2.4):
            num = integrate.quad(t_density, -np.inf, x, args=(df,))[0]
            assert student_t_cdf(x, df) == pytest.approx(num, abs=1e-8)

    def test_symmetry(self):
        assert student_t_cdf(0.0, 7.0) == 0.5
        assert student_t_cdf(1.3, 7.0) + student_t_cdf(-1.3, 7.0) == \
            pytest.approx(1.0, abs=1e-14)


class TestCohensD:
    def test_unit_effect(self):
        # means 1 and 0, both sd exactly 1 (ddof=1), equal n
        a = np.array([0.0, 1.0, 2.0])
        b = np.array([-1.0, 0.0, 1.0])
        assert cohens_d(a, b) == pytest.approx(1.0)

    def test_equal_groups(self):
        assert cohens_d([1, 2, 3], [1, 2, 3]) == 0.0

    def test_worked_example(self):
        # d = (4-2)/sqrt((2*4 + 2*1)/4) = 2/sqrt(2.5)
        assert cohens_d([2, 4, 6], [1, 2, 3]) == pytest.approx(2 / math.sqrt(2.5),
                                                               abs=1e-4)

    def test_zero_pooled_variance(self):
        with pytest.raises(ZeroPooledVariance):
            cohens_d([1, 1, 1], [2, 2, 2])


def test_format_report_style():
    r = welch_t_test([1.0, 2.0, 3.0], [4.0, 5.0, 6.5], dimension="SVD1")
    line = format_report(r)
    assert "SVD1" in line and "Cohen's d" in line and "N = 3" in line
