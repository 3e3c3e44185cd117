"""Truncated Dirichlet integrals and the numbered check suites."""

import math
from fractions import Fraction

import numpy as np
import pytest

from minimax_multinom import (
    DEFAULT_SEED,
    DomainError,
    InfeasibleRegionError,
    IntegrationMethod,
    b_trunc,
    i_trunc,
    lemma1_check,
    lemma4_check,
    lemma5_check,
    lemma6_check,
    lemma7_check,
    lemma8_check,
    log_multivariate_beta,
    run_lemma_suite,
)


def _beta_seg_exact(a: int, b: int, s: Fraction, t: Fraction) -> Fraction:
    """Exact segment integral for integer shapes via binomial expansion."""
    total = Fraction(0)
    for j in range(b):
        total += Fraction(math.comb(b - 1, j) * (-1) ** j, a + j) * (
            t ** (a + j) - s ** (a + j)
        )
    return total


class TestTruncatedIntegrals:
    def test_uniform_k2(self):
        for eps in (0.05, 0.2, 0.4):
            res = b_trunc((1.0, 1.0), eps)
            assert res.value == pytest.approx(1 - 2 * eps, rel=1e-12)
            assert i_trunc((1.0, 1.0), eps) == pytest.approx(1 - 2 * eps, rel=1e-12)

    def test_uniform_k3_similar_simplex(self):
        """Flooring the uniform 3-simplex shrinks it by (1 - 3 eps)^2."""
        res = b_trunc((1.0, 1.0, 1.0), 0.1)
        assert res.value == pytest.approx(0.7**2 * 0.5, rel=1e-9)

    def test_full_simplex_limit(self):
        for alphas in ((1.5, 2.5), (0.7, 1.2, 3.0)):
            full = math.exp(log_multivariate_beta(alphas))
            res = b_trunc(alphas, 1e-9)
            assert res.value == pytest.approx(full, rel=1e-6)

    def test_retained_fraction_bounds(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            k = int(rng.integers(2, 4))
            alphas = tuple(np.exp(rng.uniform(-1, 1.5, size=k)))
            eps = float(rng.uniform(1e-4, 0.9 / k))
            frac = i_trunc(alphas, eps)
            assert 0.0 < frac <= 1.0
            if eps > 1e-3:
                assert frac < 1.0

    def test_monotone_in_floor(self):
        alphas = (1.3, 0.8)
        vals = [i_trunc(alphas, e) for e in (0.01, 0.05, 0.1, 0.2, 0.3)]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_exact_vs_forced_quadrature_k2(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            alphas = tuple(np.exp(rng.uniform(-1, 2, size=2)))
            eps = float(rng.uniform(1e-3, 0.45))
            a = b_trunc(alphas, eps, method=IntegrationMethod.EXACT_1D)
            b = b_trunc(alphas, eps, method=IntegrationMethod.RECURSIVE_QUAD)
            assert a.value == pytest.approx(b.value, rel=1e-9)

    def test_quadrature_vs_monte_carlo_k3(self):
        rng = np.random.default_rng(23)
        for _ in range(3):
            alphas = tuple(np.exp(rng.uniform(-0.5, 1.0, size=3)))
            eps = float(rng.uniform(0.02, 0.2))
            q = b_trunc(alphas, eps, method=IntegrationMethod.RECURSIVE_QUAD)
            m = b_trunc(
                alphas, eps, method=IntegrationMethod.MONTE_CARLO,
                n_draws=400_000, seed=DEFAULT_SEED,
            )
            # MC error_estimate is 3 standard errors, relative
            tol = m.error_estimate + 1e-8
            assert abs(m.value - q.value) / q.value <= tol

    def test_monte_carlo_k4(self):
        res = b_trunc((1.0, 1.0, 1.0, 1.0), 0.05,
                      method=IntegrationMethod.MONTE_CARLO, n_draws=200_000)
        assert res.method is IntegrationMethod.MONTE_CARLO
        assert 0.0 < res.value <= math.exp(log_multivariate_beta((1,) * 4))

    def test_monte_carlo_determinism(self):
        kw = dict(method=IntegrationMethod.MONTE_CARLO, n_draws=100_000, seed=42)
        a = b_trunc((1.0, 2.0, 0.5, 1.5), 0.03, **kw)
        b = b_trunc((1.0, 2.0, 0.5, 1.5), 0.03, **kw)
        assert a.value_log == b.value_log

    def test_infeasible_region(self):
        # nearly all mass on the first cell: the floored region is unreachable
        with pytest.raises(InfeasibleRegionError):
            b_trunc((60.0, 0.2, 0.2, 0.2), 0.24,
                    method=IntegrationMethod.MONTE_CARLO, n_draws=100_000)

    def test_domain(self):
        with pytest.raises(DomainError):
            b_trunc((1.0, 1.0), 0.5)
        with pytest.raises(DomainError):
            b_trunc((1.0, -1.0), 0.1)
        with pytest.raises(DomainError):
            b_trunc((1.0, 1.0, 1.0), 0.1, method=IntegrationMethod.EXACT_1D)


class TestLemma1:
    """Alternating-envelope bounds for log(1+x)."""

    def test_equality_at_zero(self):
        rep = lemma1_check(2, [0.0])
        assert rep.max_violation <= 0.0

    def test_m_zero_hand_values(self):
        # x/(1+x) <= log(1+x) <= x at x = 1
        rep = lemma1_check(0, [1.0])
        assert rep.passed
        assert rep.witness["lower"] == pytest.approx(0.5, rel=1e-15)
        assert rep.witness["upper"] == pytest.approx(1.0, rel=1e-15)
        assert rep.witness["log1p"] == pytest.approx(math.log(2), rel=1e-15)

    @pytest.mark.parametrize("m", [0, 1, 2, 3, 5])
    def test_dense_grid(self, m):
        grid = np.concatenate([
            np.linspace(-0.99, -0.01, 200),
            np.linspace(0.01, 10.0, 400),
        ])
        assert lemma1_check(m, grid).passed

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma1_check(-1, [0.5])
        with pytest.raises(DomainError):
            lemma1_check(0, [-1.0])


class TestLemma4:
    """Retained-fraction increment bound."""

    def test_k2_hand_case(self):
        rep = lemma4_check((1.0, 1.0), 0.1)
        assert rep.passed
        # I(2,1) - I(1,1): retained fractions of Beta(2,1) and Beta(1,1)
        lhs = rep.witness["lhs"]
        expect = (0.9**2 - 0.1**2) - (1 - 0.2)  # exactly zero here
        assert lhs == pytest.approx(expect, rel=1e-10, abs=1e-10)

    def test_vanishing_floor(self):
        rep = lemma4_check((1.5, 2.0), 1e-8)
        assert rep.passed
        assert abs(rep.witness["lhs"]) < 1e-6
        assert rep.witness["rhs"] < 1e-6

    def test_random_k3(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            alphas = tuple(np.exp(rng.uniform(-1, 1.5, size=3)))
            eps = float(rng.uniform(1e-3, 0.3))
            assert lemma4_check(alphas, eps).passed


class TestLemma5:
    """Interval-shift monotonicity of segment mean ratios."""

    def test_equal_intervals(self):
        rep = lemma5_check(1.3, 2.1, 0.1, 0.6, 0.1, 0.6)
        assert rep.max_violation <= 0.0
        assert rep.witness["lhs"] == pytest.approx(rep.witness["rhs"], rel=1e-12)

    def test_uniform_halves(self):
        # means of the uniform density on [0, 1/2] and [1/2, 1]
        rep = lemma5_check(1.0, 1.0, 0.0, 0.5, 0.5, 1.0)
        assert rep.passed
        assert rep.witness["lhs"] == pytest.approx(0.25, rel=1e-12)
        assert rep.witness["rhs"] == pytest.approx(0.75, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma5_check(1.0, 1.0, 0.5, 0.4, 0.6, 0.7)
        with pytest.raises(DomainError):
            lemma5_check(1.0, 1.0, 0.3, 0.6, 0.2, 0.7)


class TestLemma6:
    """Simplex-to-interval domination of the bumped-integral ratio."""

    def test_k2_strict(self):
        rep = lemma6_check((1.2, 0.9), 0.1)
        assert rep.passed
        assert rep.witness["lhs"] < rep.witness["rhs"]

    def test_vanishing_floor_reduces_to_dirichlet_mean(self):
        alphas = (1.4, 2.2, 0.9)
        rep = lemma6_check(alphas, 1e-7)
        mean = alphas[0] / sum(alphas)
        assert rep.witness["lhs"] == pytest.approx(mean, rel=1e-4)
        assert rep.witness["rhs"] == pytest.approx(mean, rel=1e-4)

    def test_random_k3(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            alphas = tuple(np.exp(rng.uniform(-1, 1.5, size=3)))
            eps = float(rng.uniform(1e-3, 0.3))
            assert lemma6_check(alphas, eps).passed


class TestLemma7:
    """Aggregation identity for Dirichlet-multinomial marginals."""

    def test_k2_trivially_equal(self):
        rep = lemma7_check((1.3, 0.8), 9, 4)
        assert rep.witness["rel_diff"] < 1e-13

    def test_k3_exact_rational(self):
        """Both sides computed in exact rationals for integer parameters."""
        N, x1 = 6, 2
        alphas = (1, 1, 1)

        def b_exact(v):
            num = math.prod(math.factorial(x - 1) for x in v)
            return Fraction(num, math.factorial(sum(v) - 1))

        lhs = Fraction(0)
        for x2 in range(N - x1 + 1):
            x3 = N - x1 - x2
            coef = Fraction(
                math.factorial(N),
                math.factorial(x1) * math.factorial(x2) * math.factorial(x3),
            )
            lhs += b_exact((x1 + 1, x2 + 1, x3 + 1)) / b_exact(alphas) * coef
        rhs = (
            b_exact((x1 + 1, N - x1 + 2)) / b_exact((1, 2))
            * Fraction(math.comb(N, x1))
        )
        assert lhs == rhs
        rep = lemma7_check(alphas, N, x1)
        assert rep.passed
        assert rep.witness["lhs"] == pytest.approx(float(lhs), rel=1e-12)

    def test_k4_random(self):
        rng = np.random.default_rng(37)
        for _ in range(5):
            alphas = tuple(np.exp(rng.uniform(-1, 1.5, size=4)))
            N = int(rng.integers(1, 13))
            x1 = int(rng.integers(0, N + 1))
            assert lemma7_check(alphas, N, x1).passed

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma7_check((1.0, 1.0), 5, 6)


class TestLemma8:
    """Segment mean-ratio identity and its linear bound."""

    def test_no_floor_gives_beta_mean(self):
        rep = lemma8_check(2.5, 3.5, 0.0)
        assert rep.passed
        assert rep.witness["ratio"] == pytest.approx(2.5 / 6.0, rel=1e-12)

    def test_uniform_half_hand_value(self):
        """alpha = beta = 1, eps = 1/2: conditional mean 3/4; the identity
        right side is 1/2 + (1/2 * 1/2)/(2 * 1/2) = 3/4."""
        rep = lemma8_check(1.0, 1.0, 0.5)
        assert rep.passed
        assert rep.witness["ratio"] == pytest.approx(0.75, rel=1e-12)
        assert rep.witness["identity_rhs"] == pytest.approx(0.75, rel=1e-12)

    def test_exact_rational_cross_check(self):
        ratio = float(
            _beta_seg_exact(3, 2, Fraction(1, 5), Fraction(1))
            / _beta_seg_exact(2, 2, Fraction(1, 5), Fraction(1))
        )
        rep = lemma8_check(2.0, 2.0, 0.2)
        assert rep.witness["ratio"] == pytest.approx(ratio, rel=1e-11)

    def test_bound_fails_below_alpha_one(self):
        """The linear bound genuinely breaks for alpha < 1: at
        (alpha, beta, eps) = (0.05, 1, 1/2) the conditional mean is ~0.72
        but the claimed bound is ~0.52.  The identity still holds."""
        rep = lemma8_check(0.05, 1.0, 0.5)
        assert rep.witness["rel_diff"] <= 1e-10          # identity fine
        assert rep.witness["ratio"] > rep.witness["bound_rhs"] + 0.1
        assert rep.max_violation > 0.0                   # bound violated

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma8_check(1.0, 1.0, 1.0)


class TestSuites:
    """Randomized stress suites; seeds make every report reproducible."""

    @pytest.mark.parametrize("lemma", [1, 4, 5, 6, 7, 8])
    def test_suite_passes(self, lemma):
        rep = run_lemma_suite(lemma, 120)
        assert rep.passed, rep.witness
        assert rep.seed == DEFAULT_SEED
        assert rep.trials == 120

    def test_report_schema(self):
        rep = run_lemma_suite(5, 10)
        d = rep.to_dict()
        assert set(d) == {"lemma", "trials", "max_violation", "witness",
                          "seed", "tolerances"}

    def test_deterministic(self):
        a = run_lemma_suite(4, 40, seed=99)
        b = run_lemma_suite(4, 40, seed=99)
        assert a.max_violation == b.max_violation
        assert a.witness == b.witness

    def test_unknown_number(self):
        with pytest.raises(DomainError):
            run_lemma_suite(2, 10)
