"""Duhamel coefficients, tail values, and fractional-calculus checks."""

import math

import numpy as np
import pytest

from fractail import oracle
from fractail.forward import (
    NonPositiveEigenvalue,
    NonPositiveTime,
    TimeInsideSupport,
    UnsupportedOrder,
    caputo_residual_check,
    decay_bound_check,
    duhamel_coefficient,
    psi_tail,
    riemann_liouville_integral,
)
from fractail.mittag_leffler import MLParams, gamma_real, ml_eval
from fractail.sources import SourceSpec, constant_mu, polynomial_mu

UNIT = SourceSpec(constant_mu(1.0, 1.0), 1.0)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class TestClosedFormInsideSupport:
    @pytest.mark.parametrize("lam", [1.0, 100.0])
    @pytest.mark.parametrize("alpha", [0.5, 1.5])
    def test_unit_source(self, lam, alpha):
        # mu = 1: u(t) = (1 - E_{a,1}(-lam t^a)) / lam for 0 < t <= t0
        for t in (0.05, 0.6, 1.0):
            num = duhamel_coefficient(lam, alpha, UNIT, t)
            ref = (1.0 - ml_eval(MLParams(alpha, 1.0), -lam * t**alpha)) / lam
            assert rel(num, ref) < 1e-10

    @pytest.mark.parametrize("lam", [1.0, 50.0])
    @pytest.mark.parametrize("alpha", [0.5, 1.5])
    @pytest.mark.parametrize("t", [0.3, 0.9])
    def test_linear_source_reference(self, lam, alpha, t):
        # mu = 1 + s: term-by-term integration of the kernel series gives
        # u(t) = (1+t) t^a E_{a,a+1}(-z) - t^(a+1) (E_{a,a+1} - E_{a,a+2})(-z)
        # with z = lam t^a; evaluated here with the 50-digit reference.
        src = SourceSpec(polynomial_mu([1.0, 1.0], 1.0), 1.0)
        z = lam * t**alpha
        e1 = float(oracle.ml_reference(alpha, alpha + 1.0, -z))
        e2 = float(oracle.ml_reference(alpha, alpha + 2.0, -z))
        ref = (1.0 + t) * t**alpha * e1 - t ** (alpha + 1.0) * (e1 - e2)
        num = duhamel_coefficient(lam, alpha, src, t)
        assert rel(num, ref) < 1e-11


class TestTailRoutes:
    @pytest.mark.parametrize("lam,alpha", [(1.0, 0.5), (10.0, 0.7), (100.0, 1.5)])
    def test_quadrature_routes_agree_beyond_support(self, lam, alpha):
        times = np.geomspace(1.5, 50.0, 6)
        tail = psi_tail(lam, alpha, UNIT, times)
        for t, v in zip(times, tail.values):
            assert rel(duhamel_coefficient(lam, alpha, UNIT, float(t)), v) < 1e-10

    def test_two_sided_difference_form(self):
        # mu = 1, t > t0: psi(t) = (E_{a,1}(-lam (t-1)^a) - E_{a,1}(-lam t^a)) / lam.
        # The reference difference cancels, so the comparison tolerance is
        # scaled by the measured cancellation factor.
        for lam, alpha in ((1.0, 0.5), (10.0, 1.5)):
            times = np.geomspace(2.0, 1e3, 5)
            tail = psi_tail(lam, alpha, UNIT, times)
            for t, v in zip(times, tail.values):
                e_near = ml_eval(MLParams(alpha, 1.0), -lam * (t - 1.0) ** alpha)
                e_far = ml_eval(MLParams(alpha, 1.0), -lam * t**alpha)
                ref = (e_near - e_far) / lam
                cancel = (abs(e_near) + abs(e_far)) / max(abs(e_near - e_far), 1e-300)
                assert rel(v, ref) < 1e-10 * max(cancel, 1.0)

    def test_positive_and_decreasing_for_subdiffusive_orders(self):
        times = np.geomspace(1.2, 1e4, 40)
        for alpha in (0.3, 0.9):
            tail = psi_tail(math.pi**2, alpha, UNIT, times)
            assert np.all(tail.values > 0.0)
            assert np.all(np.diff(tail.values) < 0.0)

    def test_deterministic_repeat(self):
        times = np.geomspace(1.5, 100.0, 10)
        a = psi_tail(5.0, 0.6, UNIT, times).values
        b = psi_tail(5.0, 0.6, UNIT, times).values
        assert a.tobytes() == b.tobytes()


class TestDomainErrors:
    def test_time_inside_support_rejected(self):
        with pytest.raises(TimeInsideSupport):
            psi_tail(1.0, 0.5, UNIT, [0.5, 2.0])

    def test_nonpositive_time_rejected(self):
        with pytest.raises(NonPositiveTime):
            duhamel_coefficient(1.0, 0.5, UNIT, 0.0)

    def test_nonpositive_eigenvalue_rejected(self):
        with pytest.raises(NonPositiveEigenvalue):
            psi_tail(0.0, 0.5, UNIT, [2.0])

    def test_order_outside_range_rejected(self):
        with pytest.raises(ValueError):
            duhamel_coefficient(1.0, 2.0, UNIT, 0.5)

    def test_residual_check_needs_subdiffusive_order(self):
        with pytest.raises(UnsupportedOrder):
            caputo_residual_check(1.0, 1.5, UNIT, 64)


class TestFractionalCalculus:
    def test_power_rule_linear(self):
        # J^a t = Gamma(2)/Gamma(2+a) t^(1+a); product integration is exact
        # on piecewise-linear inputs up to rounding.
        alpha, n, T = 0.5, 200, 2.0
        h = T / n
        t = h * np.arange(n + 1)
        out = riemann_liouville_integral(t, alpha, h)
        exact = t ** (1.0 + alpha) / gamma_real(2.0 + alpha)
        assert np.allclose(out, exact, rtol=1e-12, atol=1e-14)

    def test_power_rule_quadratic_second_order(self):
        alpha, T = 0.7, 1.0
        errs = []
        for n in (100, 200, 400):
            h = T / n
            t = h * np.arange(n + 1)
            out = riemann_liouville_integral(t**2, alpha, h)
            exact = 2.0 * t ** (2.0 + alpha) / gamma_real(3.0 + alpha)
            errs.append(np.max(np.abs(out - exact)))
        order = math.log2(errs[0] / errs[1])
        assert order > 1.8
        assert errs[2] < errs[1] < errs[0]

    def test_residual_convergence_small_grids(self):
        rep = caputo_residual_check(math.pi**2, 0.5, UNIT, (64, 128, 256))
        assert len(rep.residual_max) == 3
        assert rep.residual_max[2] < rep.residual_max[0]
        assert min(rep.orders) >= 0.8


class TestDecayBound:
    def test_bounded_and_running_max_monotone(self):
        times = np.geomspace(2.0, 50.0, 12)
        lams = [(n * math.pi) ** 2 for n in range(1, 9)]
        tails = [psi_tail(lam, 0.5, UNIT, times) for lam in lams]
        rep = decay_bound_check(tails, UNIT)
        assert math.isfinite(rep.empirical_c)
        assert rep.empirical_c > 0.0
        assert np.all(np.diff(rep.running_max) >= 0.0)
        assert rep.running_max[-1] == pytest.approx(rep.empirical_c)
