"""Evaluator checks: reference overlap, classical identities, route seams,
and structural properties on the non-positive axis."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erfcx

from fractail import oracle
from fractail.mittag_leffler import (
    MLParams,
    gamma_real,
    ml_eval,
    ml_series,
    ml_uniform_bound_check,
)

SPOT_ALPHAS = (0.5, 1.0 / math.sqrt(2.0), 1.5)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class TestReferenceOverlap:
    @pytest.mark.parametrize("alpha", SPOT_ALPHAS)
    @pytest.mark.parametrize("beta_kind", ["same", "one"])
    def test_matches_high_precision_reference(self, alpha, beta_kind):
        beta = alpha if beta_kind == "same" else 1.0
        params = MLParams(alpha, beta)
        for eta in np.geomspace(1e-3, 1e3, 9):
            x = -float(eta)
            ref = float(oracle.ml_reference(alpha, beta, x))
            assert rel(ml_eval(params, x), ref) < 1e-10

    def test_series_region_matches_reference(self):
        params = MLParams(0.7, 1.3)
        for x in (-1e-8, -0.01, -0.5, -2.0):
            ref = float(oracle.ml_reference(0.7, 1.3, x))
            assert rel(ml_series(params, x), ref) < 1e-12


class TestClassicalIdentities:
    def test_exponential(self):
        for x in (-0.001, -1.0, -30.0, -400.0):
            assert rel(ml_eval(MLParams(1.0, 1.0), x), math.exp(x)) < 1e-10

    def test_cosine(self):
        for x in (-0.25, -2.0, -50.0):
            ref = math.cos(math.sqrt(-x))
            assert abs(ml_eval(MLParams(2.0, 1.0), x) - ref) < 1e-10

    def test_scaled_complementary_error_function(self):
        for x in (-0.1, -1.0, -10.0, -100.0):
            ref = float(erfcx(-x))
            assert rel(ml_eval(MLParams(0.5, 1.0), x), ref) < 1e-10

    def test_expm1_form_for_beta_two(self):
        for x in (-0.5, -5.0, -80.0):
            assert rel(ml_eval(MLParams(1.0, 2.0), x), math.expm1(x) / x) < 1e-13


class TestDomainAndDispatch:
    def test_positive_argument_rejected(self):
        with pytest.raises(ValueError):
            ml_eval(MLParams(0.5, 1.0), 0.1)

    def test_value_at_zero(self):
        assert ml_eval(MLParams(0.5, 0.5), 0.0) == pytest.approx(
            1.0 / gamma_real(0.5), rel=1e-15
        )

    def test_invalid_order_rejected(self):
        with pytest.raises(ValueError):
            MLParams(0.0, 1.0)
        with pytest.raises(ValueError):
            MLParams(-0.5, 1.0)

    @pytest.mark.parametrize("alpha,beta", [(0.45, 1.0), (1.31, 1.31)])
    def test_accuracy_across_route_seams(self, alpha, beta):
        # The evaluator switches methods at internal thresholds; accuracy
        # must hold on both sides of each switch point.
        from fractail.mittag_leffler import _dispatch

        d = _dispatch(alpha, beta)
        params = MLParams(alpha, beta)
        for seam in (d.series_max, d.asym_min):
            for factor in (0.97, 0.999, 1.001, 1.03):
                x = -seam * factor
                ref = float(oracle.ml_reference(alpha, beta, x))
                assert abs(ml_eval(params, x) - ref) <= 1e-10 * max(
                    abs(ref), 1e-300
                )


class TestStructuralProperties:
    @given(alpha=st.floats(0.05, 0.95), eta=st.floats(1e-6, 1e6))
    @settings(max_examples=60, deadline=None)
    def test_complete_monotonicity_range(self, alpha, eta):
        value = ml_eval(MLParams(alpha, 1.0), -eta)
        assert 0.0 < value <= 1.0

    @given(alpha=st.floats(0.1, 0.9))
    @settings(max_examples=25, deadline=None)
    def test_decreasing_in_eta(self, alpha):
        params = MLParams(alpha, 1.0)
        etas = np.geomspace(1e-3, 1e4, 30)
        vals = [ml_eval(params, -float(e)) for e in etas]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    @given(
        alpha=st.floats(0.3, 1.9),
        beta=st.floats(0.5, 2.0),
        eta=st.floats(1e-3, 1e3),
    )
    @settings(max_examples=60, deadline=None)
    def test_recurrence_shift_in_beta(self, alpha, beta, eta):
        # E_{a,b}(x) = 1/Gamma(b) + x E_{a,b+a}(x); the residual is compared
        # against the largest term entering the identity since the right
        # side cancels to O(1/eta) at large eta.
        x = -eta
        lhs = ml_eval(MLParams(alpha, beta), x)
        inner = ml_eval(MLParams(alpha, beta + alpha), x)
        rhs = 1.0 / gamma_real(beta) + x * inner
        scale = max(abs(lhs), abs(1.0 / gamma_real(beta)), abs(x * inner))
        assert abs(lhs - rhs) <= 2e-10 * scale

    def test_uniform_eta_weighted_bound(self):
        for alpha in (0.3, 0.5, 0.8):
            sup = ml_uniform_bound_check(alpha, np.geomspace(1e-4, 1e6, 80))
            assert math.isfinite(sup)
            assert sup < 10.0
