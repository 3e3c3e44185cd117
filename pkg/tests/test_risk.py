"""Exact risk engines, sup-risk search, Bayes risks, and the truncation gap.

The enumeration route is the oracle for the separable route; the separable
route in turn feeds every downstream experiment, so the identity between
them is this suite's backbone.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from minimax_multinom import (
    ALPHA_MINIMAX,
    DomainError,
    ModelSpec,
    MonteCarloSettings,
    Observation,
    OutcomeLabel,
    Predictive,
    PriorSpec,
    RiskMethod,
    SizeError,
    StatisticalPrecisionError,
    SymmetricPrior,
    ThetaPoint,
    TruncatedPredictiveTable,
    TruncatedSimplex,
    bayes_risk,
    compositions,
    risk_coordinatewise,
    risk_enumeration,
    risk_truncated_predictive,
    sup_risk,
    truncated_predictive_density,
    truncation_bayes_gap,
)

HAND_RISK = 0.5 * math.log(9.0 / 8.0)  # k=2, N=1, uniform prior, theta=(1/2,1/2)


def _random_case(rng, k, N):
    a = tuple(np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=k)))
    th = rng.dirichlet(np.ones(k))
    while th.min() < 1e-3:
        th = rng.dirichlet(np.ones(k))
    return PriorSpec(a), ModelSpec(k, N), ThetaPoint(tuple(th))


class TestThetaPoint:
    def test_validation(self):
        with pytest.raises(DomainError):
            ThetaPoint((0.5, 0.6))
        with pytest.raises(DomainError):
            ThetaPoint((1.0, 0.0))
        ThetaPoint((0.25, 0.75))

    def test_complete_and_uniform(self):
        t = ThetaPoint.complete([0.2, 0.3])
        assert t.theta == (0.2, 0.3, 0.5)
        u = ThetaPoint.uniform(4)
        assert math.fsum(u.theta) == 1.0


class TestCompositions:
    def test_count_and_order(self):
        comps = compositions(3, 2)
        assert comps.tolist() == [[0, 3], [1, 2], [2, 1], [3, 0]]
        assert len(compositions(8, 4)) == math.comb(11, 3)

    def test_rows_sum_to_n(self):
        comps = compositions(6, 3)
        assert (comps.sum(axis=1) == 6).all()


class TestRiskEngines:
    def test_hand_enumeration_value(self):
        """Each x gives KL(Ber(1/2) || Ber(2/3 or 1/3)) = 0.5 log(9/8)."""
        prior = SymmetricPrior.uniform(2).expand()
        model = ModelSpec(2, 1)
        theta = ThetaPoint.complete([0.5])
        for fn in (risk_enumeration, risk_coordinatewise):
            rep = fn(prior, model, theta)
            assert rep.exact_risk == pytest.approx(HAND_RISK, rel=1e-12)
        assert HAND_RISK == pytest.approx(0.05889151782, abs=1e-11)

    def test_methods_agree_k3_minimax(self):
        prior = SymmetricPrior.minimax(3).expand()
        model = ModelSpec(3, 2)
        theta = ThetaPoint.uniform(3)
        a = risk_enumeration(prior, model, theta).exact_risk
        b = risk_coordinatewise(prior, model, theta).exact_risk
        assert abs(a - b) <= 1e-12

    def test_methods_agree_random(self):
        rng = np.random.default_rng(0x5EED)
        for _ in range(60):
            k = int(rng.integers(2, 4))
            N = int(rng.integers(0, 6))
            prior, model, theta = _random_case(rng, k, N)
            a = risk_enumeration(prior, model, theta).exact_risk
            b = risk_coordinatewise(prior, model, theta).exact_risk
            assert abs(a - b) <= 1e-12

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            prior, model, theta = _random_case(rng, int(rng.integers(2, 5)),
                                               int(rng.integers(0, 9)))
            assert risk_coordinatewise(prior, model, theta).exact_risk >= -1e-14

    def test_report_structure(self):
        prior, model, theta = (SymmetricPrior.uniform(2).expand(),
                               ModelSpec(2, 3), ThetaPoint.complete([0.4]))
        rep = risk_coordinatewise(prior, model, theta)
        assert rep.method is RiskMethod.COORDINATEWISE
        assert rep.exact_risk == pytest.approx(math.fsum(rep.per_coordinate),
                                               abs=1e-16)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(41)
        prior, model, theta = _random_case(rng, 3, 5)
        perm = (2, 0, 1)
        base = risk_coordinatewise(prior, model, theta)
        permuted = risk_coordinatewise(prior.permuted(perm), model,
                                       theta.permuted(perm))
        for i, p in enumerate(perm):
            assert permuted.per_coordinate[i] == pytest.approx(
                base.per_coordinate[p], rel=1e-12, abs=1e-15
            )

    def test_risk_vanishes_for_large_n(self):
        prior = SymmetricPrior.minimax(2).expand()
        rep = risk_coordinatewise(prior, ModelSpec(2, 10_000),
                                  ThetaPoint.complete([0.5]))
        assert 0.0 < rep.exact_risk < 1e-4

    def test_enumeration_cap(self):
        with pytest.raises(SizeError, match="coordinatewise"):
            risk_enumeration(SymmetricPrior.uniform(6).expand(),
                             ModelSpec(6, 200), ThetaPoint.uniform(6))


class TestSupRisk:
    def test_dense_scan_oracle_k2(self):
        """The search must dominate a dense one-dimensional scan."""
        prior = SymmetricPrior.jeffreys(2).expand()
        model = ModelSpec(2, 128)
        eps = 128.0**-0.73
        trunc = TruncatedSimplex(2, eps)
        rep = sup_risk(prior, model, trunc, grid_size=128)
        grid = np.unique(np.concatenate([
            np.linspace(eps, 0.5, 3000),
            eps * np.exp(np.linspace(0, math.log(0.5 / eps), 3000)),
        ]))
        dense = max(
            risk_coordinatewise(prior, model, ThetaPoint.complete([t])).exact_risk
            for t in grid
        )
        assert rep.sup_value >= dense - 1e-12
        assert rep.sup_value <= dense + 1e-6  # dense grid undersamples mildly

    def test_recompute_at_argmax(self):
        prior = SymmetricPrior.minimax(2).expand()
        model = ModelSpec(2, 64)
        rep = sup_risk(prior, model, TruncatedSimplex(2, 0.05), grid_size=64)
        again = risk_coordinatewise(prior, model, rep.argmax_theta).exact_risk
        assert abs(again - rep.sup_value) <= 1e-12
        assert min(rep.argmax_theta.theta) >= 0.05 - 1e-12

    def test_nested_grid_monotone(self):
        prior = SymmetricPrior.jeffreys(3).expand()
        model = ModelSpec(3, 32)
        trunc = TruncatedSimplex(3, 0.03)
        coarse = sup_risk(prior, model, trunc, grid_size=64).sup_value
        fine = sup_risk(prior, model, trunc, grid_size=127).sup_value
        assert fine >= coarse - 1e-13

    def test_jeffreys_boundary_witness(self):
        """At N = 1024 with the usual schedule the maximizer sits on the
        floor (the 1/theta divergence dominates)."""
        model = ModelSpec(2, 1024)
        eps = 1024.0**-0.73
        rep = sup_risk(SymmetricPrior.jeffreys(2).expand(), model,
                       TruncatedSimplex(2, eps), grid_size=256)
        assert rep.argmax_theta.theta[0] == pytest.approx(eps, rel=1e-9)

    def test_minimax_prior_negative_excess(self):
        """For the minimax concentration the sup sits at the center and the
        second-order excess is negative."""
        N = 256
        model = ModelSpec(2, N)
        rep = sup_risk(SymmetricPrior.minimax(2).expand(), model,
                       TruncatedSimplex(2, N**-0.73), grid_size=128)
        assert rep.sup_value - 0.5 / N < 0
        assert rep.argmax_theta.theta[0] == pytest.approx(0.5, abs=1e-3)

    def test_trace_and_determinism(self):
        prior = SymmetricPrior.uniform(2).expand()
        model = ModelSpec(2, 16)
        trunc = TruncatedSimplex(2, 0.1)
        a = sup_risk(prior, model, trunc, grid_size=64, seed=7)
        b = sup_risk(prior, model, trunc, grid_size=64, seed=7)
        assert a.sup_value == b.sup_value
        assert a.argmax_theta.theta == b.argmax_theta.theta
        assert len(a.search_trace) >= 3
        labels = [lab for lab, _ in a.search_trace]
        assert any("ascent" in lab for lab in labels)
        assert any("pin" in lab for lab in labels)

    def test_threads_do_not_change_result(self):
        prior = SymmetricPrior.minimax(3).expand()
        model = ModelSpec(3, 12)
        trunc = TruncatedSimplex(3, 0.05)
        a = sup_risk(prior, model, trunc, grid_size=48, threads=1)
        b = sup_risk(prior, model, trunc, grid_size=48, threads=4)
        assert a.sup_value == b.sup_value
        assert a.argmax_theta.theta == b.argmax_theta.theta

    def test_grid_size_validation(self):
        with pytest.raises(DomainError):
            sup_risk(SymmetricPrior.uniform(2).expand(), ModelSpec(2, 4),
                     TruncatedSimplex(2, 0.1), grid_size=8)


class TestBayesRisk:
    def test_quadrature_vs_monte_carlo(self):
        """k=2, N=8, uniform prior, floored weight: the two integration
        routes agree (the Monte Carlo run is seeded, so the difference is a
        fixed number well inside three standard errors)."""
        w = SymmetricPrior.uniform(2)
        model = ModelSpec(2, 8)
        trunc = TruncatedSimplex(2, 0.05)
        q = bayes_risk(w, model, Predictive.FULL, trunc)
        m = bayes_risk(w, model, Predictive.FULL, trunc,
                       mc=MonteCarloSettings(n_draws=200_000), mode="mc")
        assert abs(q - m) <= 2e-5

    def test_mc_threads_deterministic(self):
        w = SymmetricPrior.uniform(2)
        model = ModelSpec(2, 6)
        trunc = TruncatedSimplex(2, 0.05)
        mc = MonteCarloSettings(n_draws=60_000, seed=11)
        a = bayes_risk(w, model, Predictive.FULL, trunc, mc=mc, mode="mc",
                       threads=1)
        b = bayes_risk(w, model, Predictive.FULL, trunc, mc=mc, mode="mc",
                       threads=4)
        assert a == b

    def test_stderr_ceiling(self):
        w = SymmetricPrior.uniform(2)
        with pytest.raises(StatisticalPrecisionError):
            bayes_risk(w, ModelSpec(2, 6), Predictive.FULL,
                       TruncatedSimplex(2, 0.05),
                       mc=MonteCarloSettings(n_draws=5_000,
                                             stderr_ceiling=1e-12),
                       mode="mc")

    def test_aitchison_optimality(self):
        """Under the floored weight, the floored-prior predictive is the
        Bayes rule, so its Bayes risk cannot exceed the full one's."""
        for k, N in ((2, 4), (2, 8), (3, 5)):
            for alpha in (0.5, 1.0, ALPHA_MINIMAX):
                for eps in (0.05, 0.2):
                    w = SymmetricPrior(alpha, k)
                    trunc = TruncatedSimplex(k, eps)
                    model = ModelSpec(k, N)
                    full = bayes_risk(w, model, Predictive.FULL, trunc)
                    restricted = bayes_risk(w, model, Predictive.TRUNCATED, trunc)
                    assert restricted <= full + 1e-12

    def test_bayes_below_sup_over_support(self):
        w = SymmetricPrior.uniform(2)
        model = ModelSpec(2, 8)
        trunc = TruncatedSimplex(2, 0.05)
        bayes = bayes_risk(w, model, Predictive.FULL, trunc)
        sup = sup_risk(w.expand(), model, trunc, grid_size=64).sup_value
        assert bayes <= sup + 1e-10

    def test_weight_concentrated_near_center(self):
        """As the floor approaches 1/k the weight pins the central point."""
        w = SymmetricPrior.uniform(2)
        model = ModelSpec(2, 8)
        bayes = bayes_risk(w, model, Predictive.FULL, TruncatedSimplex(2, 0.49))
        center = risk_coordinatewise(w.expand(), model,
                                     ThetaPoint.complete([0.5])).exact_risk
        spread = abs(
            risk_coordinatewise(w.expand(), model,
                                ThetaPoint.complete([0.49])).exact_risk - center
        )
        assert abs(bayes - center) <= spread + 1e-12

    def test_full_simplex_weight_with_singular_kernel(self):
        # Jeffreys weight has integrable endpoint singularities
        w = SymmetricPrior.jeffreys(2)
        val = bayes_risk(w, ModelSpec(2, 4), Predictive.FULL)
        assert 0.0 < val < 1.0

    def test_k3_quadrature(self):
        w = SymmetricPrior.uniform(3)
        trunc = TruncatedSimplex(3, 0.08)
        val = bayes_risk(w, ModelSpec(3, 4), Predictive.FULL, trunc)
        mc = bayes_risk(w, ModelSpec(3, 4), Predictive.FULL, trunc,
                        mc=MonteCarloSettings(n_draws=150_000), mode="mc")
        assert val == pytest.approx(mc, abs=3e-4)

    def test_truncated_predictive_needs_truncation(self):
        with pytest.raises(DomainError):
            bayes_risk(SymmetricPrior.uniform(2), ModelSpec(2, 4),
                       Predictive.TRUNCATED)

    def test_caps(self):
        w = SymmetricPrior.uniform(2)
        with pytest.raises(SizeError):
            bayes_risk(w, ModelSpec(2, 65), Predictive.TRUNCATED,
                       TruncatedSimplex(2, 0.05))
        with pytest.raises(SizeError):
            bayes_risk(SymmetricPrior.uniform(4), ModelSpec(4, 4),
                       Predictive.TRUNCATED, TruncatedSimplex(4, 0.05))


class TestTruncatedPredictiveRisk:
    def test_pointwise_against_direct_definition(self):
        """risk of the floored predictive recomputed from its definition
        via the model-level truncated predictive density."""
        alpha = SymmetricPrior.uniform(2)
        trunc = TruncatedSimplex(2, 0.1)
        model = ModelSpec(2, 5)
        theta = ThetaPoint.complete([0.35])
        fast = risk_truncated_predictive(alpha, trunc, model, theta)

        direct = 0.0
        th = theta.theta
        for x1 in range(6):
            x = (x1, 5 - x1)
            px = math.comb(5, x1) * th[0] ** x1 * th[1] ** (5 - x1)
            for i in range(2):
                q = truncated_predictive_density(alpha, trunc, model,
                                                 Observation(x), OutcomeLabel(i))
                direct += px * th[i] * math.log(th[i] / q)
        assert fast == pytest.approx(direct, rel=1e-9)

    def test_table_reuse_matches(self):
        alpha = SymmetricPrior.minimax(2)
        trunc = TruncatedSimplex(2, 0.08)
        model = ModelSpec(2, 6)
        table = TruncatedPredictiveTable(alpha, trunc, model)
        theta = ThetaPoint.complete([0.25])
        a = risk_truncated_predictive(alpha, trunc, model, theta, table)
        b = risk_truncated_predictive(alpha, trunc, model, theta)
        assert a == b


class TestTruncationBayesGap:
    def test_exact_rational_oracle(self):
        """k=2, alpha=1, N=8, eps=1/10 against a fully independent assembly:
        exact rational segment integrals, the symmetry-reduced sum over the
        first-cell count, and float logs only at the end."""

        def bseg(a, b, s, t):
            total = Fraction(0)
            for j in range(b):
                total += Fraction(math.comb(b - 1, j) * (-1) ** j, a + j) * (
                    t ** (a + j) - s ** (a + j)
                )
            return total

        def bfull(a, b):
            return Fraction(math.factorial(a - 1) * math.factorial(b - 1),
                            math.factorial(a + b - 1))

        N = 8
        s, t = Fraction(1, 10), Fraction(9, 10)
        base = bseg(1, 1, s, t)
        oracle = 0.0
        for x1 in range(N + 1):
            x2 = N - x1
            b_bumped = bseg(x1 + 2, x2 + 1, s, t)
            b_plain = bseg(x1 + 1, x2 + 1, s, t)
            i_ratio = (b_bumped / bfull(x1 + 2, x2 + 1)) / (
                b_plain / bfull(x1 + 1, x2 + 1)
            )
            oracle += (
                2.0 * float(b_bumped / base) * math.comb(N, x1)
                * math.log(float(i_ratio))
            )

        gap = truncation_bayes_gap(SymmetricPrior.uniform(2),
                                   TruncatedSimplex(2, 0.1), ModelSpec(2, 8))
        assert gap == pytest.approx(oracle, rel=1e-9)

    def test_nonnegative(self):
        gap = truncation_bayes_gap(SymmetricPrior.minimax(2),
                                   TruncatedSimplex(2, 0.15), ModelSpec(2, 12))
        assert gap >= -1e-12

    def test_vanishing_floor(self):
        tiny = truncation_bayes_gap(SymmetricPrior.uniform(2),
                                    TruncatedSimplex(2, 1e-5), ModelSpec(2, 4))
        moderate = truncation_bayes_gap(SymmetricPrior.uniform(2),
                                        TruncatedSimplex(2, 0.05), ModelSpec(2, 4))
        assert abs(tiny) < 1e-4
        assert abs(tiny) < moderate
