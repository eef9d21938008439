"""Arbitrary-precision reference values, independent of the float64 hybrid.

Two routes, overlapping and cross-checked in the test suite:

* series route: exact-mpf Taylor sum with working precision raised by the
  predicted alternating-series cancellation (max term ~ exp(eta**(1/alpha)));
  reciprocal-gamma tables are cached per (alpha, beta) and grown lazily,
* integral route (0 < alpha < 1, beta <= 1): the real-axis representation
  obtained by collapsing the Hankel contour,

      E_{a,b}(-eta) = (1/pi) * Int_0^inf u**(a-b) exp(-u)
                      * [u**a sin(pi(1-b)) + eta sin(pi(1-b+a))]
                      / (u**(2a) + 2 u**a eta cos(pi a) + eta**2) du,

  with beta > 1 reduced by the exact shift E_{a,b}(z) = (E_{a,b-a}(z)
  - 1/Gamma(b-a)) / z.  The denominator has no real zeros for eta > 0, and the
  endpoint power is tamed by a u = w**p substitution before tanh-sinh
  quadrature.  Only the rational factor of the integrand depends on eta, so
  tanh-sinh nodes and every transcendental node quantity are precomputed once
  per (alpha, beta) and each evaluation reduces to a rational sweep.

All gamma arguments are assembled in mpf arithmetic: float alpha times large k
in double precision injects ~1e-13 argument jitter which the max term
amplifies catastrophically.
"""

from __future__ import annotations

import math

import mpmath as mp
from mpmath.calculus import quadrature as _quadrature

__all__ = ["gamma_reference", "ml_reference", "OracleRangeError"]

_LOG10E = math.log10(math.e)

# series route allowed while cancellation stays below this many digits
_SERIES_DIGIT_CAP = 220


class OracleRangeError(ValueError):
    """Reference evaluation not supported at this (alpha, beta, x)."""


def gamma_reference(x: float, digits: int = 50):
    """Gamma(x) as an mpf carrying ~digits significant digits."""
    with mp.workdps(digits + 10):
        return +mp.gamma(x)


class _SeriesTable:
    __slots__ = ("dps", "a", "b", "vals")

    def __init__(self, dps: int, alpha: float, beta: float) -> None:
        self.dps = dps
        self.a = mp.mpf(alpha)
        self.b = mp.mpf(beta)
        self.vals: list = []


_TABLES: dict[tuple[float, float], _SeriesTable] = {}


def _series_reference(alpha: float, beta: float, x: float, digits: int, cancel: float):
    # first dps guess assumes an O(1) sum; when the sum is itself tiny against
    # the largest term (e.g. E_{1,1}(-eta) = exp(-eta)) the achieved headroom
    # is measured and the sweep redone at the precision actually required
    dps = digits + int(cancel) + 12
    for _ in range(4):
        key = (alpha, beta)
        table = _TABLES.get(key)
        if table is None or table.dps < dps:
            table = _SeriesTable(dps, alpha, beta)
            _TABLES[key] = table
        with mp.workdps(dps):
            xm = mp.mpf(x)
            s = mp.mpf(0)
            p = mp.mpf(1)
            stop = mp.mpf(10) ** (-(digits + 8))
            prev = mp.inf
            max_mag = mp.mpf(0)
            k = 0
            while True:
                if k >= len(table.vals):
                    with mp.workdps(table.dps):
                        table.vals.append(mp.rgamma(table.a * k + table.b))
                t = p * table.vals[k]
                s += t
                at = abs(t)
                max_mag = max(max_mag, at)
                if k > 4 and at < prev and abs(s) > 0 and at <= stop * abs(s):
                    break
                if k > 500_000:
                    raise OracleRangeError(f"series reference did not settle at x={x}")
                prev = at
                p *= xm
                k += 1
            if s == 0:
                cancel_digits = float(dps)
            else:
                cancel_digits = float(mp.log10(max_mag / abs(s)))
            needed = int(cancel_digits) + digits + 10
            if dps >= needed:
                return +s
        dps = needed + 8
    raise OracleRangeError(f"series reference precision did not stabilize at x={x}")


_TS_RULE = _quadrature.TanhSinh(mp.mp)
_TS_DEGREE = 7
_INT_TABLES: dict[tuple[float, float, int], list] = {}


def _integral_table(alpha: float, beta, dps: int) -> list:
    # Precomputed tanh-sinh data for the Hankel-collapse integrand at fixed
    # (alpha, beta <= 1).  Only the rational factor depends on eta, so each
    # node stores (W A sin(pi(1-b)), W sin(pi(1-b+a)), A**2, 2 A cos(pi a))
    # with A = u**a and W = weight * jacobian * exp(-u); evaluation is then a
    # plain rational sweep over the nodes.
    key = (alpha, float(beta), dps)
    table = _INT_TABLES.get(key)
    if table is not None:
        return table
    with mp.workdps(dps + 8):
        a = mp.mpf(alpha)
        b = mp.mpf(beta)
        sb = mp.sinpi(1 - b)
        sba = mp.sinpi(1 - b + a)
        ca = mp.cospi(a)
        # leading endpoint power of the integrand in u
        e0 = float(a - b) if sba != 0 else float(2 * a - b)
        p = max(1, math.ceil(3.0 / (e0 + 1.0)))
        wmax = mp.mpf(60.0) ** (1.0 / p)
        prec = int(dps * 3.33) + 10
        pexp = p * (a - b + 1) - 1
        scale = mp.mpf(2) ** (1 - _TS_DEGREE)
        table = []
        for lo, hi in ((mp.mpf(0), wmax / 10), (wmax / 10, wmax), (wmax, mp.inf)):
            for w_node, wt in _TS_RULE.get_nodes(lo, hi, _TS_DEGREE, prec):
                if w_node <= 0:
                    continue
                u = w_node ** p
                if u > 240:  # exp(-240) is beyond any supported digit target
                    continue
                area = u ** a
                big_w = wt * scale * p * w_node ** pexp * mp.exp(-u)
                table.append((big_w * area * sb, big_w * sba, area * area, 2 * area * ca))
    _INT_TABLES[key] = table
    return table


def _integral_reference(alpha: float, beta: float, eta: float, digits: int):
    dps = digits + 12
    with mp.workdps(dps):
        z = -mp.mpf(eta)
        a = mp.mpf(alpha)
        b = mp.mpf(beta)
        shifts = 0
        while b > 1:
            b -= a
            shifts += 1
        etam = mp.mpf(eta)
        eta2 = etam * etam
        acc = mp.mpf(0)
        for wasb, wsba, a2, two_aca in _integral_table(alpha, b, dps):
            acc += (wasb + etam * wsba) / (a2 + two_aca * etam + eta2)
        val = acc / mp.pi
        for _ in range(shifts):
            val = (val - mp.rgamma(b)) / z
            b += a
        return +val


def ml_reference(alpha: float, beta: float, x: float, digits: int = 50):
    """E_{alpha,beta}(x) for x <= 0 as an mpf carrying ~digits significant digits."""
    if not (0.0 < alpha <= 2.0):
        raise OracleRangeError(f"alpha={alpha} outside (0, 2]")
    if beta <= 0.0:
        raise OracleRangeError(f"beta={beta} must be positive")
    if x > 0.0:
        raise OracleRangeError("reference evaluator covers the non-positive axis only")
    if x == 0.0:
        with mp.workdps(digits + 10):
            return +mp.rgamma(beta)
    eta = -x
    cancel = _LOG10E * eta ** (1.0 / alpha)
    if cancel <= _SERIES_DIGIT_CAP:
        return _series_reference(alpha, beta, x, digits, cancel)
    if 0.0 < alpha < 1.0:
        return _integral_reference(alpha, beta, eta, digits)
    raise OracleRangeError(
        f"x={x} needs ~{cancel:.0f} cancellation digits at alpha={alpha}; "
        "outside the supported reference range"
    )
