"""Two-parameter Mittag-Leffler function E_{a,b} on the non-positive real axis.

Evaluation is a three-regime hybrid:

* defining Taylor series in float64 where alternating-series cancellation is
  benign (max term ~ exp(eta**(1/alpha)) stays small),
* optimal-truncation asymptotic expansion in inverse powers for large eta,
* an extended-precision Taylor sweep (mpmath, working precision sized from the
  predicted cancellation) in the intermediate band where neither float64
  summation nor the divergent expansion reaches the accuracy target.

The asymptotic coefficients are (-1)**(k+1) / Gamma(beta - alpha*k); terms
whose Gamma argument sits on a pole vanish identically, which is what produces
the restricted exponent ladders used by the tail analysis downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp

__all__ = [
    "MLParams",
    "AsymptoticTermSeries",
    "PoleArgument",
    "NonConvergent",
    "BelowValidityThreshold",
    "gamma_real",
    "ml_series",
    "ml_asymptotic",
    "asymptotic_series",
    "ml_eval",
    "ml_uniform_bound_check",
]

_LOG10E = math.log10(math.e)
_POLE_TOL = 1e-12

# float64 series is trusted while the max series term stays below e**_Y_FLOAT;
# beyond that the alternating sum eats more digits than the 1e-10 contract allows
_Y_FLOAT = 10.0
_SERIES_CUTOFF = 5.0

# asymptotic path engages once optimal truncation reaches this relative level
_ASYM_REL = 1e-12
_KMAX_ASYM = 400


class PoleArgument(ValueError):
    """Gamma evaluated within tolerance of a non-positive integer."""


class NonConvergent(ArithmeticError):
    """Series did not settle within the term budget (argument outside the series regime)."""


class BelowValidityThreshold(ValueError):
    """Asymptotic expansion requested below its certified validity threshold."""


@dataclass(frozen=True)
class MLParams:
    """Order pair (alpha, beta) for E_{alpha,beta}."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def _sinpi(x: float) -> float:
    # exact integer reduction keeps accuracy near the zeros of sin(pi x)
    n = round(x)
    s = math.sin(math.pi * (x - n))
    return -s if (n % 2) else s


def gamma_real(x: float) -> float:
    """Gamma on the real line; negative arguments via the reflection formula."""
    n = round(x)
    if n <= 0 and abs(x - n) < _POLE_TOL:
        raise PoleArgument(f"Gamma argument {x} within {_POLE_TOL} of pole at {n}")
    if x >= 0.5:
        return math.gamma(x)
    return math.pi / (_sinpi(x) * math.gamma(1.0 - x))


def _recip_gamma_log(x: float) -> tuple[float, float]:
    """(sign, log|1/Gamma(x)|); sign 0.0 with log -inf when 1/Gamma(x) = 0."""
    n = round(x)
    if n <= 0 and abs(x - n) < _POLE_TOL:
        return 0.0, -math.inf
    if x >= 0.5:
        return 1.0, -math.lgamma(x)
    s = _sinpi(x)
    return math.copysign(1.0, s), math.log(abs(s)) + math.lgamma(1.0 - x) - math.log(math.pi)


def ml_series(params: MLParams, x: float, tol: float = 1e-15, max_terms: int = 10_000) -> float:
    """Defining series sum(x**k / Gamma(alpha k + beta)).

    Adaptive stop: next term below tol * |partial sum| once magnitudes decrease.
    Raises NonConvergent when terms have not started decreasing within the
    budget or when cancellation exceeds what float64 can represent at tol.
    """
    a, b = params.alpha, params.beta
    if x == 0.0:
        return 1.0 / gamma_real(b)
    lx = math.log(abs(x))
    neg = x < 0.0
    terms: list[float] = []
    partial = 0.0
    prev_mag = math.inf
    max_mag = 0.0
    decreasing = False
    k = 0
    while True:
        mag = math.exp(k * lx - math.lgamma(a * k + b))
        t = -mag if (neg and k % 2) else mag
        terms.append(t)
        partial += t
        max_mag = max(max_mag, mag)
        if mag < prev_mag:
            decreasing = True
            if k > 2 and mag <= tol * abs(partial):
                break
        prev_mag = mag
        k += 1
        if k >= max_terms:
            if not decreasing:
                raise NonConvergent(
                    f"series terms still growing after {max_terms} terms at x={x}"
                )
            break
    total = math.fsum(terms)
    cancel_err = max_mag * 2.0 ** -52
    if cancel_err > 100.0 * max(tol * abs(total), 1e-300):
        raise NonConvergent(
            f"alternating cancellation at x={x} leaves ~{cancel_err:.1e} absolute error, "
            f"beyond tol={tol:.1e} at result scale {abs(total):.1e}"
        )
    return total


@dataclass(frozen=True)
class AsymptoticTermSeries:
    """Truncated inverse-power expansion of E_{alpha,beta}(-eta) for large eta.

    value ~ sum(coefficients[i] * eta**(-exponents[i])).  Zero coefficients mark
    terms killed by Gamma poles.  remainder_order is the inverse power of the
    first omitted non-vanishing term (inf when the whole power tail vanishes,
    i.e. integer alpha).
    """

    params: MLParams
    exponents: tuple[int, ...]
    coefficients: tuple[float, ...]
    remainder_order: float
    validity_threshold: float
    _term_logs: tuple[tuple[int, float, float], ...]  # (k, sign, log|c_k|), retained nonzero
    _omitted_logs: tuple[tuple[int, float], ...]  # (k, log|c_k|), next nonzero omitted

    def evaluate(self, eta: float) -> float:
        if eta <= 0.0:
            raise ValueError("eta must be positive")
        le = math.log(eta)
        return math.fsum(s * math.exp(lc - k * le) for k, s, lc in self._term_logs)

    def remainder_bound(self, eta: float) -> float:
        if eta <= 0.0:
            raise ValueError("eta must be positive")
        total = 0.0
        if self._omitted_logs:
            le = math.log(eta)
            total = 2.0 * math.fsum(math.exp(lc - k * le) for k, lc in self._omitted_logs)
        a, b = self.params.alpha, self.params.beta
        if a == 2.0:
            return total + 1.0  # oscillates at O(1) on this axis; crude but honest
        if a >= 1.0:
            total += math.exp(_osc_env_log(a, b, eta))
        return total


def _coeff_sign_log(alpha: float, beta: float, k: int) -> tuple[float, float]:
    sign, lg = _recip_gamma_log(beta - alpha * k)
    if k % 2 == 0:
        sign = -sign
    return sign, lg


def _osc_env_log(alpha: float, beta: float, eta: float) -> float:
    """log of the oscillatory-exponential remainder envelope for 1 <= alpha < 2.

    On the negative axis E_{alpha,beta} carries, beyond every inverse power, a
    pair of terms ~ (1/alpha) eta**((1-beta)/alpha) exp(eta**(1/alpha) e^{i pi/alpha});
    their modulus decays like exp(eta**(1/alpha) cos(pi/alpha)), which for alpha
    near 2 dominates the smallest retained term by many orders.
    """
    return (
        eta ** (1.0 / alpha) * math.cos(math.pi / alpha)
        + ((1.0 - beta) / alpha) * math.log(eta)
        + math.log(2.0 / alpha)
    )


@lru_cache(maxsize=256)
def asymptotic_series(params: MLParams, n_terms: int) -> AsymptoticTermSeries:
    """Build the n_terms-term asymptotic expansion with a certified-use threshold."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    a, b = params.alpha, params.beta
    exps = []
    coeffs = []
    term_logs = []
    for k in range(1, n_terms + 1):
        sign, lg = _coeff_sign_log(a, b, k)
        exps.append(k)
        c = sign * math.exp(lg) if sign != 0.0 else 0.0
        coeffs.append(c)
        if sign != 0.0:
            term_logs.append((k, sign, lg))
    omitted = []
    for k in range(n_terms + 1, n_terms + 1 + _KMAX_ASYM):
        sign, lg = _coeff_sign_log(a, b, k)
        if sign != 0.0:
            omitted.append((k, lg))
            if len(omitted) == 3:
                break
    remainder_order = float(omitted[0][0]) if omitted else math.inf

    def bound_at(eta: float) -> float:
        le = math.log(eta)
        total = 0.0
        if omitted:
            total = 2.0 * math.fsum(math.exp(lc - k * le) for k, lc in omitted)
        if a == 2.0:
            return total + 1.0
        if a >= 1.0:
            total += math.exp(_osc_env_log(a, b, eta))
        return total

    # smallest grid eta where the remainder bound drops below 1e-3 of the
    # smallest retained non-vanishing term (absolute 1e-12 when none retained)
    threshold = math.inf
    for j in range(0, 161):
        eta = 10.0 ** (j / 16.0)
        if term_logs:
            le = math.log(eta)
            smallest = min(math.exp(lc - k * le) for k, _, lc in term_logs)
            ok = bound_at(eta) <= 1e-3 * smallest
        else:
            ok = bound_at(eta) <= 1e-12
        if ok:
            threshold = eta
            break
    return AsymptoticTermSeries(
        params=params,
        exponents=tuple(exps),
        coefficients=tuple(coeffs),
        remainder_order=remainder_order,
        validity_threshold=threshold,
        _term_logs=tuple(term_logs),
        _omitted_logs=tuple(omitted),
    )


def ml_asymptotic(params: MLParams, eta: float, n_terms: int) -> tuple[float, float]:
    """(value, remainder bound) of the truncated expansion at eta > 0.

    Raises BelowValidityThreshold when eta sits below the series' certified
    threshold.
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    series = asymptotic_series(params, n_terms)
    if eta < series.validity_threshold:
        raise BelowValidityThreshold(
            f"eta={eta:g} below validity threshold {series.validity_threshold:g} "
            f"for n_terms={n_terms}"
        )
    return series.evaluate(eta), series.remainder_bound(eta)


@dataclass(frozen=True)
class _Dispatch:
    series_max: float
    asym_min: float
    signs: tuple[float, ...]  # sign of full term coefficient, index k-1
    logs: tuple[float, ...]  # log|coefficient|, -inf at poles
    env_logs: tuple[float, ...]  # pole-free envelope log Gamma(alpha k - beta + 1)/pi


@lru_cache(maxsize=256)
def _dispatch(alpha: float, beta: float) -> _Dispatch:
    # env_logs: the truncation error of the expansion behaves like the
    # pole-free coefficient envelope Gamma(alpha k - beta + 1)/pi, which keeps
    # decreasing smoothly through pole indices where the raw |sin|-carrying
    # terms dip to zero; stopping and thresholding must follow the envelope,
    # not the wobbling raw magnitudes
    signs = []
    logs = []
    env_logs = []
    k0 = None
    lnpi = math.log(math.pi)
    for k in range(1, _KMAX_ASYM + 1):
        s, lg = _coeff_sign_log(alpha, beta, k)
        signs.append(s)
        logs.append(lg)
        arg = alpha * k - beta + 1.0
        env_logs.append(math.lgamma(arg) - lnpi if arg > 0.0 else max(lg, 0.0))
        if s != 0.0 and k0 is None:
            k0 = k
    series_max = min(_SERIES_CUTOFF, _Y_FLOAT ** alpha)
    asym_min = math.inf
    if k0 is not None and alpha < 2.0:
        log_rel = math.log(_ASYM_REL)
        for j in range(0, 241):
            eta = 10.0 ** (j / 16.0)
            le = math.log(eta)
            lead = logs[k0 - 1] - k0 * le
            best = min(lg - k * le for k, lg in enumerate(env_logs, start=1))
            if 1.0 <= alpha < 2.0:
                best = max(best, _osc_env_log(alpha, beta, eta))
            if best <= lead + log_rel:
                asym_min = eta
                break
    elif alpha == 1.0:
        # every inverse-power coefficient vanishes: E_{1,1}(-eta) = exp(-eta);
        # past the subnormal-double underflow point 0.0 is the rounded value
        asym_min = 745.0
    return _Dispatch(
        series_max=series_max,
        asym_min=asym_min,
        signs=tuple(signs),
        logs=tuple(logs),
        env_logs=tuple(env_logs),
    )


def _asym_eval_optimal(d: _Dispatch, eta: float) -> float:
    # sum expansion terms until the error envelope bottoms out (optimal
    # truncation); raw magnitudes are not monotone near pole indices
    le = math.log(eta)
    terms = []
    prev_env = math.inf
    floor_log = -math.inf
    for k in range(1, _KMAX_ASYM + 1):
        env = d.env_logs[k - 1] - k * le
        if env >= prev_env:
            break
        s = d.signs[k - 1]
        if s != 0.0:
            lt = d.logs[k - 1] - k * le
            terms.append(s * math.exp(lt))
            if floor_log == -math.inf:
                floor_log = lt + math.log(1e-18)
        if env < floor_log:
            break
        prev_env = env
    return math.fsum(terms)


class _BandEntry:
    __slots__ = ("dps", "a", "b", "vals")

    def __init__(self, dps: int, alpha: float, beta: float) -> None:
        self.dps = dps
        self.a = mp.mpf(alpha)
        self.b = mp.mpf(beta)
        self.vals: list = []


_BAND_CACHE: dict[tuple[float, float], _BandEntry] = {}


def _ml_band(alpha: float, beta: float, x: float) -> float:
    # extended-precision Taylor sweep; working precision absorbs cancellation.
    # When the sum turns out exponentially smaller than the largest term the
    # first precision guess is short; measure the achieved headroom and redo.
    eta = -x
    y = eta ** (1.0 / alpha)
    dps = 18 + int(_LOG10E * y) + 8
    for _ in range(4):
        key = (alpha, beta)
        entry = _BAND_CACHE.get(key)
        if entry is None or entry.dps < dps:
            entry = _BandEntry(dps, alpha, beta)
            _BAND_CACHE[key] = entry
        with mp.workdps(entry.dps):
            xm = mp.mpf(x)
            s = mp.mpf(0)
            p = mp.mpf(1)
            prev = mp.inf
            max_mag = mp.mpf(0)
            k = 0
            while True:
                if k >= len(entry.vals):
                    entry.vals.append(mp.rgamma(entry.a * k + entry.b))
                t = p * entry.vals[k]
                s += t
                at = abs(t)
                max_mag = max(max_mag, at)
                if k > 4 and at < prev and abs(s) > 0 and at <= abs(s) * mp.mpf(1e-17):
                    break
                if k > 200_000:
                    raise NonConvergent(f"band series did not settle at x={x}")
                prev = at
                p *= xm
                k += 1
            if s == 0:
                cancel_digits = entry.dps
            else:
                cancel_digits = float(mp.log10(max_mag / abs(s)))
            needed = int(cancel_digits) + 17
            if entry.dps >= needed + 2:
                return float(s)
        dps = needed + 12
    raise NonConvergent(f"band precision did not stabilize at x={x}")


def ml_eval(params: MLParams, x: float) -> float:
    """E_{alpha,beta}(x) for x <= 0, relative accuracy ~1e-10 or better."""
    if x > 0.0:
        raise ValueError("ml_eval is defined on the non-positive real axis")
    if x == 0.0:
        return 1.0 / gamma_real(params.beta)
    if params.alpha == 1.0:
        # Classical order: elementary closed forms.  The generic machinery
        # cannot serve beta = 1 here (the power-law asymptotic series of
        # e^x is identically zero), so this case is exact instead.
        if params.beta == 1.0:
            return math.exp(x)
        if params.beta == 2.0:
            return math.expm1(x) / x
    eta = -x
    d = _dispatch(params.alpha, params.beta)
    if eta <= d.series_max:
        try:
            return ml_series(params, x, tol=3e-16)
        except NonConvergent:
            # cancellation guard tripped (result near a zero, or max term
            # marginal); the extended-precision sweep always covers this
            pass
    elif eta >= d.asym_min:
        return _asym_eval_optimal(d, eta)
    return _ml_band(params.alpha, params.beta, x)


def ml_uniform_bound_check(alpha: float, eta_grid) -> float:
    """max over the grid of |E_{alpha,alpha}(-eta)| * (1 + eta).

    Finite uniformly in eta; the classical bound C/(1+eta) for the
    relaxation kernel.
    """
    params = MLParams(alpha, alpha)
    best = 0.0
    for eta in eta_grid:
        if eta < 0.0:
            raise ValueError("eta grid must be non-negative")
        val = abs(ml_eval(params, -float(eta))) * (1.0 + float(eta))
        best = max(best, val)
    return best
