"""Long-time tail machinery: exponent ladder, source moments, kernel
expansion with a certified remainder, and the composite tail model.

For t beyond the source support each modal tail has the expansion

    psi(t) ~ sum_k sum_m c_{k,m} t^-(alpha l_k - alpha + 1 + m),

where the ladder l_1 < l_2 < ... enumerates the integer indices l >= 2
whose inverse-power term actually survives in the expansion of
E_{alpha,alpha}(-eta): the term coefficient is 1/Gamma(alpha - alpha*l),
which vanishes exactly when alpha*(l - 1) is a positive integer, so
membership keeps l with dist(alpha*(l-1), N) > 1e-9.  (For irrational
alpha this is every l >= 2.)  The m-sum comes from expanding the kernel
around s/t = 0, with coefficients proportional to the signed source
moments mu_m and generalized binomial factors; its truncation remainder is
certified through the Lagrange form of the binomial series remainder on
s/t <= 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mittag_leffler import gamma_real
from .sources import SourceSpec
from .spectral import EigenSystem, summability_report

__all__ = [
    "AlphaIsOne",
    "TimeTooSmall",
    "DivergentCoefficients",
    "InsufficientDecades",
    "ExponentLadder",
    "MomentVector",
    "TailModel",
    "ModelErrorFit",
    "exponent_ladder",
    "moments",
    "gen_binomial",
    "kernel_moment_expansion",
    "build_tail_model",
    "model_error_order",
]

MEMBERSHIP_TOL = 1e-9
RADIUS_RATIO = 0.5  # r = t0 / T1 with T1 = 2 t0
FLOAT_EPS = float(np.finfo(float).eps)


class AlphaIsOne(ValueError):
    """The expansion machinery excludes alpha = 1 (all terms vanish)."""


class TimeTooSmall(ValueError):
    """Kernel expansion requires t > 2 t0 so that s/t <= 1/2."""


class DivergentCoefficients(ValueError):
    """Pairing coefficients fail the summability requirement."""


class InsufficientDecades(ValueError):
    """Order fitting needs at least two decades of tail data."""


def _term_survives(alpha: float, ell: int) -> bool:
    x = alpha * (ell - 1)
    return abs(x - round(x)) > MEMBERSHIP_TOL


@dataclass(frozen=True)
class ExponentLadder:
    """First K surviving expansion indices for a given order alpha."""

    alpha: float
    ells: tuple[int, ...]

    @property
    def K(self) -> int:
        return len(self.ells)

    def sigma(self, k: int) -> float:
        """Inverse-power exponent alpha*l_k - alpha + 1 of the k-th term
        (k is 1-based)."""
        return self.alpha * self.ells[k - 1] - self.alpha + 1.0


def exponent_ladder(alpha: float, K: int) -> ExponentLadder:
    """Ascending enumeration of the surviving expansion indices.

    Membership keeps integers l >= 2 with dist(alpha*(l-1), N) > 1e-9,
    i.e. exactly those whose coefficient 1/Gamma(alpha - alpha*l) is
    nonzero.  Examples: alpha = 0.5 -> {2, 4, 6, ...} (odd l die at the
    Gamma poles), irrational alpha -> {2, 3, 4, ...}.
    """
    if abs(alpha - 1.0) <= MEMBERSHIP_TOL:
        raise AlphaIsOne("alpha = 1 has no surviving inverse-power terms")
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    if K < 1:
        raise ValueError("K must be >= 1")
    ells: list[int] = []
    ell = 2
    while len(ells) < K:
        if _term_survives(alpha, ell):
            ells.append(ell)
        ell += 1
        if ell > 100 * (K + 2):
            raise ValueError("membership enumeration failed to find K entries")
    return ExponentLadder(alpha, tuple(ells))


@dataclass(frozen=True)
class MomentVector:
    """Signed moments mu_m = integral_0^t0 (-s)^m mu(s) ds for m = 0..M."""

    moments: tuple[float, ...]
    m1: int | None
    t0: float
    mu_l1: float

    @property
    def M(self) -> int:
        return len(self.moments) - 1


def moments(mu, t0: float, M: int) -> MomentVector:
    """Exact segment-wise signed moments, plus the first active index m1.

    m1 is the smallest m with |mu_m| > 1e-12 * t0^m * ||mu||_L1 (None when
    every computed moment vanishes at that threshold).
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    vals = tuple(mu.moment(m) for m in range(M + 1))
    l1 = mu.l1_norm()
    m1: int | None = None
    for m, v in enumerate(vals):
        if abs(v) > 1e-12 * t0**m * l1:
            m1 = m
            break
    return MomentVector(vals, m1, t0, l1)


def gen_binomial(neg_sigma: float, m: int) -> float:
    """Generalized binomial coefficient binom(neg_sigma, m) as the falling
    factorial neg_sigma (neg_sigma - 1) ... (neg_sigma - m + 1) over m!."""
    if m < 0:
        raise ValueError("m must be >= 0")
    out = 1.0
    for i in range(m):
        out *= (neg_sigma - i) / (i + 1)
    return out


def kernel_moment_expansion(
    sigma: float, source: SourceSpec, M: int, t: float
) -> tuple[float, float]:
    """Expansion of integral_0^t0 mu(s) (t-s)^-sigma ds in powers of 1/t.

    Returns (partial sum, certified remainder bound).  The partial sum is
    sum_{m<=M} binom(-sigma, m) mu_m t^-(sigma+m); the bound is the
    Lagrange-form binomial remainder with s/t <= r = 1/2:

        |error| <= |binom(-sigma, M+1)| (1-r)^-(sigma+M+1)
                   * t0^(M+1) ||mu||_L1 / t^(sigma+M+1).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    t0 = source.t0
    if t <= t0 / RADIUS_RATIO:
        raise TimeTooSmall(f"need t > {t0 / RADIUS_RATIO} (= t0 / r with r = 1/2)")
    mv = moments(source.mu, t0, M)
    terms = [
        gen_binomial(-sigma, m) * mv.moments[m] * t ** -(sigma + m)
        for m in range(M + 1)
    ]
    value = math.fsum(terms)
    c4 = abs(gen_binomial(-sigma, M + 1)) * (1.0 - RADIUS_RATIO) ** -(sigma + M + 1)
    bound = c4 * t0 ** (M + 1) * mv.mu_l1 * t ** -(sigma + M + 1)
    # The certificate must cover the evaluation's own arithmetic: a forward
    # error allowance of (n + 5) eps sum|terms| (n summands, ~5 rounded ops
    # per term) keeps the bound valid when truncation error falls below
    # double-precision roundoff at large t.
    bound += (M + 6) * FLOAT_EPS * math.fsum(abs(x) for x in terms)
    return value, bound


@dataclass(frozen=True)
class TailModel:
    """Finite power-law model sum_{k,m} c_{k,m} t^-e_{k,m} of the observed
    tail, with the certified order of the dropped remainder."""

    ladder: ExponentLadder
    moments: MomentVector
    A: tuple[float, ...]
    A_tail_estimates: tuple[float, ...]
    exponents: np.ndarray
    coefficients: np.ndarray
    remainder_order: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, e in zip(self.coefficients.ravel(), self.exponents.ravel()):
            if c != 0.0:
                out = out + c * t**-e
        if out.ndim == 0:
            return float(out)
        return out


def term_coefficient(alpha: float, ell: int, sigma: float, m: int) -> float:
    """Known factor multiplying mu_m * A_k in the (k, m) model term."""
    lead = (-1.0) ** (ell + 1) / gamma_real(alpha - alpha * ell)
    return lead * gen_binomial(-sigma, m)


def build_tail_model(
    a_n: Sequence[float],
    system: EigenSystem,
    ladder: ExponentLadder,
    source_moments: MomentVector,
    K: int,
    M: int,
) -> TailModel:
    """Assemble the tail model from pairing coefficients and moments.

    A_k = sum_n a_n lambda_n^-l_k by direct summation over the retained
    modes, with a power-law tail estimate for the dropped ones;
    c_{k,m} = ((-1)^(l_k+1) / Gamma(alpha - alpha l_k))
              * binom(-(alpha l_k - alpha + 1), m) * mu_m * A_k.
    """
    if K < 1 or K > ladder.K:
        raise ValueError("need 1 <= K <= ladder length")
    if M < 0 or M > source_moments.M:
        raise ValueError("need 0 <= M <= available moments")
    a = np.asarray(a_n, dtype=float)
    lam = system.eigenvalues[: a.size]
    report = summability_report(a, system) if a.size >= 10 else None
    if report is not None and report.divergent:
        raise DivergentCoefficients(
            "sum |a_n / lambda_n| still grows over the last half of the modes"
        )
    alpha = ladder.alpha

    A_vals: list[float] = []
    tails: list[float] = []
    n_idx = np.arange(1, a.size + 1, dtype=float)
    half = max(a.size // 2, 1)
    mask = np.abs(a[half - 1 :]) > 0
    if np.count_nonzero(mask) >= 3:
        p_fit = float(
            np.polyfit(
                np.log(n_idx[half - 1 :][mask]), np.log(np.abs(a[half - 1 :][mask])), 1
            )[0]
        )
    else:
        p_fit = 0.0
    for k in range(1, K + 1):
        ell = ladder.ells[k - 1]
        A_vals.append(math.fsum(a * lam ** float(-ell)))
        # Tail of sum_{n>N} a_n lambda_n^-l under |a_n| ~ c n^p and the
        # Weyl continuation lambda(x) ~ lambda_N (x/N)^(2/d).
        d = system.dimension
        decay = 2.0 * ell / d - p_fit
        if decay > 1.0 and a.size >= 3:
            c_amp = float(np.abs(a[-1])) / n_idx[-1] ** p_fit if a[-1] != 0 else 0.0
            tails.append(c_amp * n_idx[-1] ** (p_fit + 1) * lam[-1] ** float(-ell) / (decay - 1.0))
        else:
            tails.append(math.inf)

    exps = np.empty((K, M + 1))
    coefs = np.empty((K, M + 1))
    for k in range(1, K + 1):
        ell = ladder.ells[k - 1]
        sigma = ladder.sigma(k)
        for m in range(M + 1):
            exps[k - 1, m] = sigma + m
            coefs[k - 1, m] = (
                term_coefficient(alpha, ell, sigma, m)
                * source_moments.moments[m]
                * A_vals[k - 1]
            )
    if not np.all(np.isfinite(coefs)):
        raise DivergentCoefficients("model coefficients are not finite")

    next_ladder = exponent_ladder(alpha, K + 1)
    sigma_next = alpha * next_ladder.ells[K] - alpha + 1.0
    remainder_order = min(sigma_next, ladder.sigma(1) + M + 1.0)
    return TailModel(
        ladder=ladder,
        moments=source_moments,
        A=tuple(A_vals),
        A_tail_estimates=tuple(tails),
        exponents=exps,
        coefficients=coefs,
        remainder_order=remainder_order,
    )


@dataclass(frozen=True)
class ModelErrorFit:
    """Log-log fit of the model-vs-observation gap."""

    slope: float
    intercept: float
    r_squared: float
    remainder_order: float
    degenerate: bool

    @property
    def within_tolerance(self) -> bool:
        if self.degenerate:
            return False
        return abs(-self.slope - self.remainder_order) <= 0.05 * self.remainder_order


def model_error_order(
    times: Sequence[float],
    observed: Sequence[float],
    model: TailModel,
    floor_rel: float = 1e-12,
) -> ModelErrorFit:
    """Least-squares slope of log |observed - model| against log t.

    The fit is rejected as degenerate when the gap sits at the rounding
    floor of the observations (relative level ``floor_rel``), as happens
    when the model reproduces the data identically.
    """
    t = np.asarray(times, dtype=float)
    g = np.asarray(observed, dtype=float)
    if t.size < 4 or t[-1] / t[0] < 100.0 * (1 - 1e-9):
        raise InsufficientDecades("need tail samples spanning at least two decades")
    gap = np.abs(g - model(t))
    scale = float(np.max(np.abs(g)))
    if scale == 0.0 or float(np.max(gap)) <= floor_rel * scale:
        return ModelErrorFit(math.nan, math.nan, 0.0, model.remainder_order, True)
    # Observation accuracy is relative to the local value, so points whose
    # gap falls within the per-point floor carry no slope information.
    mask = gap > 3.0 * floor_rel * np.abs(g)
    if np.count_nonzero(mask) < 4 or t[mask][-1] / t[mask][0] < 10.0:
        return ModelErrorFit(math.nan, math.nan, 0.0, model.remainder_order, True)
    x = np.log(t[mask])
    y = np.log(gap[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return ModelErrorFit(
        float(slope), float(intercept), r2, model.remainder_order, False
    )
