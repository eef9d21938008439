"""Exponent ladders, moment expansions, and tail models."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp
from scipy.special import binom as scipy_binom

from fractail.asymptotics import (
    AlphaIsOne,
    TimeTooSmall,
    build_tail_model,
    exponent_ladder,
    gen_binomial,
    kernel_moment_expansion,
    model_error_order,
    moments,
    term_coefficient,
)
from fractail.sources import SourceSpec, constant_mu, polynomial_mu
from fractail.spectral import laplacian_1d_dirichlet

UNIT = SourceSpec(constant_mu(1.0, 1.0), 1.0)
IRRATIONAL = 1.0 / math.sqrt(2.0)


class TestExponentLadder:
    def test_half_order_keeps_even_indices(self):
        ladder = exponent_ladder(0.5, 4)
        assert ladder.ells == (2, 4, 6, 8)

    def test_three_halves_order_keeps_even_indices(self):
        ladder = exponent_ladder(1.5, 3)
        assert ladder.ells == (2, 4, 6)

    def test_irrational_order_keeps_every_index(self):
        ladder = exponent_ladder(IRRATIONAL, 5)
        assert ladder.ells == (2, 3, 4, 5, 6)

    @pytest.mark.parametrize("alpha", [0.5, 0.25, 1.5, IRRATIONAL, 0.3])
    def test_membership_matches_gamma_pole_route(self, alpha):
        # A term survives iff 1/Gamma(alpha - alpha*ell) is nonzero, i.e.
        # the Gamma argument is not a nonpositive integer; checked here in
        # 40-digit arithmetic, independently of the modular-arithmetic test
        # used by the implementation.
        ladder = exponent_ladder(alpha, 6)
        kept = set(ladder.ells)
        with mp.workdps(40):
            for ell in range(2, max(kept) + 1):
                recip = abs(mp.rgamma(mp.mpf(alpha) * (1 - ell)))
                assert (recip > mp.mpf("1e-30")) == (ell in kept)

    def test_sigma_values_and_monotonicity(self):
        ladder = exponent_ladder(IRRATIONAL, 5)
        sig = [ladder.sigma(k) for k in range(1, 6)]
        for k, ell in enumerate(ladder.ells, start=1):
            assert sig[k - 1] == pytest.approx(
                IRRATIONAL * ell - IRRATIONAL + 1.0, rel=1e-15
            )
        assert all(a < b for a, b in zip(sig, sig[1:]))

    def test_classical_order_rejected(self):
        with pytest.raises(AlphaIsOne):
            exponent_ladder(1.0, 3)


class TestMoments:
    def test_linear_factor_exact_values(self):
        mv = moments(polynomial_mu([1.0, 1.0], 1.0), 1.0, 3)
        assert mv.moments[0] == pytest.approx(1.5, rel=1e-14)
        assert mv.moments[1] == pytest.approx(-5.0 / 6.0, rel=1e-14)
        assert mv.moments[2] == pytest.approx(7.0 / 12.0, rel=1e-14)
        assert mv.m1 == 0

    def test_vanishing_factor_has_no_active_moment(self):
        mv = moments(polynomial_mu([0.0], 1.0), 1.0, 3)
        assert mv.m1 is None
        assert all(v == 0.0 for v in mv.moments)


class TestGeneralizedBinomial:
    @given(sigma=st.floats(0.05, 12.0), m=st.integers(0, 18))
    @settings(max_examples=100, deadline=None)
    def test_recurrence(self, sigma, m):
        # binom(-s, m+1) = binom(-s, m) (-s - m) / (m + 1)
        b_m = gen_binomial(-sigma, m)
        b_next = gen_binomial(-sigma, m + 1)
        assert b_next == pytest.approx(
            b_m * (-sigma - m) / (m + 1.0), rel=1e-13, abs=1e-290
        )

    @given(
        sigma=st.floats(0.1, 8.0).filter(lambda s: abs(s - round(s)) > 1e-3),
        m=st.integers(0, 10),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_scipy_route(self, sigma, m):
        # scipy's beta-function route itself has poles at integer -sigma,
        # so the cross-check stays away from them.
        ref = float(scipy_binom(-sigma, m))
        assert gen_binomial(-sigma, m) == pytest.approx(ref, rel=1e-10, abs=1e-300)

    def test_alternating_signs(self):
        for m in range(8):
            assert gen_binomial(-1.5, m) * (-1.0) ** m > 0.0


class TestKernelExpansion:
    @staticmethod
    def exact(sigma: float, t: float) -> float:
        with mp.workdps(60):
            tm, s = mp.mpf(t), mp.mpf(sigma)
            return float(((tm - 1) ** (1 - s) - tm ** (1 - s)) / (s - 1))

    @pytest.mark.parametrize("sigma", [1.5, 2.0, 1.0 + IRRATIONAL])
    @pytest.mark.parametrize("M", [0, 3])
    def test_error_within_certified_bound(self, sigma, M):
        for t in np.geomspace(3.0, 1e4, 9):
            value, bound = kernel_moment_expansion(sigma, UNIT, M, float(t))
            err = abs(value - self.exact(sigma, float(t)))
            assert err <= bound

    def test_bound_shrinks_with_more_moments(self):
        t = 50.0
        _, b0 = kernel_moment_expansion(1.7, UNIT, 0, t)
        _, b4 = kernel_moment_expansion(1.7, UNIT, 4, t)
        assert b4 < b0 * 1e-3

    def test_time_too_small_rejected(self):
        with pytest.raises(TimeTooSmall):
            kernel_moment_expansion(1.5, UNIT, 2, 1.5)


class TestTailModel:
    def test_leading_term_sign_and_slope(self):
        # For 0 < alpha < 1, mu >= 0, a_1 > 0 the tail is a positive
        # multiple of t^-(alpha+1) at leading order.
        alpha = 0.6
        system = laplacian_1d_dirichlet(1.0, 1)
        ladder = exponent_ladder(alpha, 2)
        mv = moments(UNIT.mu, 1.0, 2)
        model = build_tail_model([1.0], system, ladder, mv, K=1, M=0)
        big = np.array([1e7, 2e7])
        vals = model(big)
        assert np.all(vals > 0.0)
        slope = (math.log(vals[1]) - math.log(vals[0])) / math.log(2.0)
        assert slope == pytest.approx(-(alpha + 1.0), rel=1e-6)

    def test_leading_coefficient_value(self):
        alpha = 0.6
        lam = math.pi**2
        system = laplacian_1d_dirichlet(1.0, 1)
        ladder = exponent_ladder(alpha, 2)
        mv = moments(UNIT.mu, 1.0, 0)
        model = build_tail_model([1.0], system, ladder, mv, K=1, M=0)
        # c_{1,0} = (-1)^(l+1)/Gamma(alpha - alpha*l) * mu_0 * A_1, l = 2
        with mp.workdps(30):
            expect = float(-1.0 / mp.gamma(-alpha) * 1.0 * lam**-2.0)
        assert model(100.0) == pytest.approx(
            expect * 100.0 ** -(alpha + 1.0), rel=1e-12
        )

    def test_remainder_order_formula(self):
        alpha = IRRATIONAL
        system = laplacian_1d_dirichlet(1.0, 1)
        mv = moments(UNIT.mu, 1.0, 6)
        for K, M in ((1, 2), (2, 1), (3, 6)):
            ladder = exponent_ladder(alpha, K + 1)
            model = build_tail_model([1.0], system, ladder, mv, K=K, M=M)
            sigma_next = alpha * exponent_ladder(alpha, K + 1).ells[K] - alpha + 1.0
            expect = min(sigma_next, (alpha + 1.0) + M + 1.0)
            assert model.remainder_order == pytest.approx(expect, rel=1e-14)

    def test_term_coefficient_consistency(self):
        # term_coefficient must equal the closed-form product it documents.
        alpha, ell, m = 0.45, 3, 2
        sigma = alpha * ell - alpha + 1.0
        with mp.workdps(30):
            expect = float(
                (-1.0) ** (ell + 1)
                / mp.gamma(alpha - alpha * ell)
                * mp.binomial(-sigma, m)
            )
        assert term_coefficient(alpha, ell, sigma, m) == pytest.approx(expect, rel=1e-12)


class TestModelErrorOrder:
    def _model(self, alpha=0.5, K=1, M=2):
        system = laplacian_1d_dirichlet(1.0, 1)
        ladder = exponent_ladder(alpha, K + 1)
        mv = moments(UNIT.mu, 1.0, max(M, 2))
        return build_tail_model([1.0], system, ladder, mv, K=K, M=M)

    def test_recovers_known_remainder_slope(self):
        model = self._model()
        t = np.geomspace(1e2, 1e6, 60)
        synthetic = model(t) + 0.37 * t**-model.remainder_order
        fit = model_error_order(t, synthetic, model)
        assert not fit.degenerate
        assert fit.slope == pytest.approx(-model.remainder_order, rel=1e-6)
        assert fit.r_squared > 0.999999
        assert fit.within_tolerance

    def test_exact_data_is_degenerate(self):
        model = self._model()
        t = np.geomspace(1e2, 1e6, 40)
        fit = model_error_order(t, model(t), model)
        assert fit.degenerate

    def test_gap_below_rounding_floor_is_degenerate(self):
        model = self._model()
        t = np.geomspace(1e2, 1e6, 40)
        data = model(t) * (1.0 + 1e-14 * np.cos(np.arange(40)))
        fit = model_error_order(t, data, model)
        assert fit.degenerate
