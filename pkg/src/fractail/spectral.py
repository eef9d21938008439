"""Eigen-decompositions of the 1-D elliptic operator and observation tools.

Two backends construct an :class:`EigenSystem` for A v = -(a v')' - c v with
Dirichlet ends on (0, L):

* :func:`laplacian_1d_dirichlet` — the analytic eigenpairs
  lambda_n = (n pi / L)^2, phi_n = sqrt(2/L) sin(n pi x / L);
* :func:`discretize_sturm_liouville` — a symmetric tridiagonal finite
  difference discretization for variable coefficients, solved with a
  dedicated tridiagonal eigensolver (O(M^-2) eigenvalue convergence).

On top of a system the module provides modal projections, fractional power
norms with truncation-tail reporting, interior/flux observation functionals
(with the pairing coefficients the recovery pipeline consumes), and the
summability / eigenvalue-growth diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "InvalidCoefficients",
    "RegionMismatch",
    "EigenSystem",
    "SpatialProfile",
    "ObservationSpec",
    "FractionalNormResult",
    "SummabilityReport",
    "laplacian_1d_dirichlet",
    "discretize_sturm_liouville",
    "project",
    "reconstruct",
    "fractional_power_norm",
    "pairing_coefficients",
    "observe",
    "summability_report",
    "weyl_growth_check",
]

DEFAULT_QUAD_POINTS = 4097
DEFAULT_MODES = 64


class InvalidCoefficients(ValueError):
    """Operator coefficients violate a >= kappa > 0 or c <= 0 on the grid."""


class RegionMismatch(ValueError):
    """Observation region is incompatible with the system domain."""


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of the operator, orthonormal in L2(0, L).

    ``phi(n, x)`` evaluates the n-th eigenfunction (n is 1-based) at x
    (scalar or array); ``dphi`` its spatial derivative; ``a_coeff`` the
    diffusion coefficient entering the flux functional.
    """

    dimension: int
    eigenvalues: np.ndarray
    multiplicities: tuple[int, ...]
    domain_length: float
    phi: Callable[[int, np.ndarray], np.ndarray]
    dphi: Callable[[int, np.ndarray], np.ndarray]
    a_coeff: Callable[[np.ndarray], np.ndarray]
    kind: str
    grid: np.ndarray | None = None

    def __post_init__(self) -> None:
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.size == 0:
            raise ValueError("need at least one eigenvalue")
        if lam[0] <= 0 or np.any(np.diff(lam) <= 0):
            raise ValueError("eigenvalues must be strictly increasing and positive")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.size)


def laplacian_1d_dirichlet(length: float, n_modes: int = DEFAULT_MODES) -> EigenSystem:
    """Analytic Dirichlet Laplacian on (0, length)."""
    if not length > 0:
        raise ValueError("domain length must be positive")
    if n_modes < 1:
        raise ValueError("need at least one mode")
    L = float(length)
    n = np.arange(1, n_modes + 1, dtype=float)
    lam = (n * math.pi / L) ** 2
    amp = math.sqrt(2.0 / L)

    def phi(mode: int, x):
        return amp * np.sin(mode * math.pi * np.asarray(x, dtype=float) / L)

    def dphi(mode: int, x):
        w = mode * math.pi / L
        return amp * w * np.cos(w * np.asarray(x, dtype=float))

    def a_coeff(x):
        return np.ones_like(np.asarray(x, dtype=float))

    return EigenSystem(
        dimension=1,
        eigenvalues=lam,
        multiplicities=(1,) * n_modes,
        domain_length=L,
        phi=phi,
        dphi=dphi,
        a_coeff=a_coeff,
        kind="laplacian",
    )


def discretize_sturm_liouville(
    a_coeff: Callable[[np.ndarray], np.ndarray],
    c_coeff: Callable[[np.ndarray], np.ndarray],
    length: float,
    grid_size: int,
    n_modes: int,
    kappa_min: float = 1e-10,
) -> EigenSystem:
    """Symmetric tridiagonal discretization of A v = -(a v')' - c v.

    Second-order finite differences on a uniform grid with ``grid_size``
    interior points; eigenvalues converge to the continuum values at
    O(grid_size^-2) for smooth coefficients.
    """
    if not length > 0:
        raise ValueError("domain length must be positive")
    if n_modes < 1 or n_modes > grid_size:
        raise ValueError("need 1 <= n_modes <= grid_size")
    L = float(length)
    m = int(grid_size)
    h = L / (m + 1)
    x_int = h * np.arange(1, m + 1)
    x_half = h * (np.arange(0, m + 1) + 0.5)

    a_half = np.asarray(a_coeff(x_half), dtype=float)
    c_int = np.asarray(c_coeff(x_int), dtype=float)
    if np.any(a_half < kappa_min):
        raise InvalidCoefficients(
            f"diffusion coefficient drops below kappa={kappa_min} on the grid"
        )
    if np.any(c_int > 1e-14):
        raise InvalidCoefficients("potential coefficient must satisfy c <= 0")

    diag = (a_half[:-1] + a_half[1:]) / h**2 - c_int
    off = -a_half[1:-1] / h**2
    lam, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_modes - 1))

    # Grid L2 normalization and a deterministic sign (positive slope at x=0).
    vec = vec / math.sqrt(h)
    for j in range(vec.shape[1]):
        if vec[0, j] < 0:
            vec[:, j] = -vec[:, j]

    x_full = np.concatenate(([0.0], x_int, [L]))
    vec_full = np.zeros((m + 2, n_modes))
    vec_full[1:-1, :] = vec

    def phi(mode: int, x):
        return np.interp(np.asarray(x, dtype=float), x_full, vec_full[:, mode - 1])

    def dphi(mode: int, x):
        v = vec_full[:, mode - 1]
        x = np.asarray(x, dtype=float)
        # Second-order one-sided differences at the ends, centered inside.
        grad = np.gradient(v, h, edge_order=2)
        return np.interp(x, x_full, grad)

    def a_fn(x):
        return np.asarray(a_coeff(np.asarray(x, dtype=float)), dtype=float)

    return EigenSystem(
        dimension=1,
        eigenvalues=np.asarray(lam, dtype=float),
        multiplicities=(1,) * n_modes,
        domain_length=L,
        phi=phi,
        dphi=dphi,
        a_coeff=a_fn,
        kind="sturm_liouville",
        grid=x_full,
    )


def _quad_grid(system: EigenSystem, n_points: int = DEFAULT_QUAD_POINTS) -> np.ndarray:
    if system.grid is not None:
        return system.grid
    return np.linspace(0.0, system.domain_length, n_points)


def _inner(values_f: np.ndarray, values_g: np.ndarray, x: np.ndarray) -> float:
    return float(simpson(values_f * values_g, x=x))


def project(
    f: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    system: EigenSystem,
    mode: int | None = None,
    n_points: int = DEFAULT_QUAD_POINTS,
):
    """Modal coefficients (f, phi_n) by composite Simpson quadrature.

    ``f`` is a callable on [0, L] or an array sampled on the quadrature
    grid.  Returns the coefficient for ``mode`` (1-based) or the full
    vector over all retained modes when ``mode`` is None.
    """
    x = _quad_grid(system, n_points)
    fv = np.asarray(f(x), dtype=float) if callable(f) else np.asarray(f, dtype=float)
    if fv.shape != x.shape:
        raise ValueError("sample array must match the quadrature grid")
    if mode is not None:
        return _inner(fv, system.phi(mode, x), x)
    return np.array(
        [_inner(fv, system.phi(n, x), x) for n in range(1, system.n_modes + 1)]
    )


def reconstruct(coeffs: Sequence[float], system: EigenSystem, x) -> np.ndarray:
    """Evaluate sum_n coeffs[n] phi_n(x)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for n, c in enumerate(coeffs, start=1):
        if c != 0.0:
            out = out + c * system.phi(n, x)
    return out


@dataclass(frozen=True)
class SpatialProfile:
    """Spatial factor f through its modal coordinates (P_n f = f_n phi_n).

    ``regularity_sigma`` declares the fractional-power regularity used for
    truncation-tail estimates: sum_n lambda_n^{2 sigma} f_n^2 is asserted
    finite at that sigma.
    """

    modal_coefficients: np.ndarray
    regularity_sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "modal_coefficients",
            np.asarray(self.modal_coefficients, dtype=float),
        )

    @classmethod
    def from_function(
        cls,
        f: Callable[[np.ndarray], np.ndarray],
        system: EigenSystem,
        regularity_sigma: float = 1.0,
    ) -> "SpatialProfile":
        return cls(project(f, system), regularity_sigma)

    def padded(self, n_modes: int) -> np.ndarray:
        c = self.modal_coefficients
        if c.size >= n_modes:
            return c[:n_modes]
        return np.concatenate([c, np.zeros(n_modes - c.size)])


@dataclass(frozen=True)
class FractionalNormResult:
    """Value of ||A^sigma f|| over retained modes plus the estimated tail."""

    value: float
    tail_estimate: float
    sigma: float
    modes_used: int

    def __float__(self) -> float:
        return self.value


def fractional_power_norm(
    profile: SpatialProfile, system: EigenSystem, sigma: float
) -> FractionalNormResult:
    """sqrt(sum_n lambda_n^{2 sigma} ||P_n f||^2) with a truncation-tail report.

    The tail beyond the retained modes is estimated from the declared
    regularity: if B^2 = sum lambda^{2 s1} f_n^2 with s1 = regularity_sigma,
    the dropped part of the sigma-sum is at most lambda_N^{2(sigma-s1)} B^2
    when sigma <= s1, and is reported as unbounded (inf) otherwise.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    lam = system.eigenvalues
    f = profile.padded(lam.size)
    value = math.sqrt(float(np.sum(lam ** (2 * sigma) * f**2)))
    s1 = profile.regularity_sigma
    b_sq = float(np.sum(lam ** (2 * s1) * f**2))
    if sigma <= s1:
        tail = float(lam[-1] ** (2 * (sigma - s1)) * b_sq)
    else:
        tail = math.inf
    return FractionalNormResult(value, tail, sigma, lam.size)


@dataclass(frozen=True)
class ObservationSpec:
    """Interior or flux observation functional.

    kind='interior': region=(x_lo, x_hi) inside [0, L] with a test function
    v(x); the functional pairs the solution with v on the region.
    kind='flux': region lists boundary endpoints (each 0 or L) with one
    weight per endpoint; the functional is the outward co-normal flux
    (-a(0) u'(0) at the left end, +a(L) u'(L) at the right end).
    """

    kind: str
    region: tuple[float, ...]
    test_function: Callable[[np.ndarray], np.ndarray] | None = None
    endpoint_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("interior", "flux"):
            raise ValueError("kind must be 'interior' or 'flux'")
        if self.kind == "interior":
            if len(self.region) != 2 or not self.region[0] < self.region[1]:
                raise ValueError("interior region must be (x_lo, x_hi) with x_lo < x_hi")
            if self.test_function is None:
                raise ValueError("interior observation needs a test function")
        else:
            if len(self.region) == 0:
                raise ValueError("flux observation needs at least one endpoint")


def _check_region(spec: ObservationSpec, system: EigenSystem) -> None:
    L = system.domain_length
    if spec.kind == "interior":
        lo, hi = spec.region
        if lo < -1e-12 or hi > L * (1 + 1e-12):
            raise RegionMismatch(
                f"interior region ({lo}, {hi}) is not contained in (0, {L})"
            )
    else:
        for x_star in spec.region:
            if not (abs(x_star) <= 1e-12 * max(1.0, L) or abs(x_star - L) <= 1e-12 * L):
                raise RegionMismatch(
                    f"flux endpoint {x_star} is not a boundary point of (0, {L})"
                )


def pairing_coefficients(
    profile: SpatialProfile,
    system: EigenSystem,
    spec: ObservationSpec,
    n_points: int = DEFAULT_QUAD_POINTS,
) -> np.ndarray:
    """Per-mode pairing a_n of P_n f with the observation functional.

    Interior: a_n = (P_n f, v)_{L2(region)}.  Flux: a_n = sum over the
    requested endpoints of weight * a(x*) * d/dx (P_n f)(x*) * (outward
    sign), with outward sign -1 at x=0 and +1 at x=L.
    """
    _check_region(spec, system)
    lam = system.eigenvalues
    f = profile.padded(lam.size)
    out = np.zeros(lam.size)
    if spec.kind == "interior":
        lo, hi = spec.region
        x = np.linspace(lo, hi, n_points)
        v = np.asarray(spec.test_function(x), dtype=float)
        for n in range(1, lam.size + 1):
            if f[n - 1] != 0.0:
                out[n - 1] = f[n - 1] * _inner(system.phi(n, x), v, x)
    else:
        weights = spec.endpoint_weights or (1.0,) * len(spec.region)
        if len(weights) != len(spec.region):
            raise ValueError("need one weight per flux endpoint")
        L = system.domain_length
        for x_star, w in zip(spec.region, weights):
            sign = -1.0 if abs(x_star) <= 1e-12 * max(1.0, L) else 1.0
            a_val = float(np.asarray(system.a_coeff(np.array([x_star])))[0])
            for n in range(1, lam.size + 1):
                if f[n - 1] != 0.0:
                    d = float(np.asarray(system.dphi(n, np.array([x_star])))[0])
                    out[n - 1] += w * sign * a_val * d * f[n - 1]
    return out


def observe(
    modal_values: np.ndarray,
    system: EigenSystem,
    spec: ObservationSpec,
    profile: SpatialProfile,
    n_points: int = DEFAULT_QUAD_POINTS,
):
    """Observation functional applied to u = sum_n c_n(t) P_n f.

    ``modal_values`` has shape (N,) for a single time or (N, T) for a time
    series; returns a scalar or a length-T array accordingly.
    """
    a_n = pairing_coefficients(profile, system, spec, n_points)
    c = np.asarray(modal_values, dtype=float)
    if c.shape[0] != a_n.size:
        raise ValueError("modal_values first axis must match the mode count")
    if c.ndim == 1:
        return float(a_n @ c)
    return a_n @ c


@dataclass(frozen=True)
class SummabilityReport:
    """Diagnostics for sum_n |a_n / lambda_n| convergence."""

    terms: np.ndarray
    partial_sums: np.ndarray
    total: float
    tail_exponent: float
    divergent: bool


def summability_report(a_n: Sequence[float], system: EigenSystem) -> SummabilityReport:
    """Partial sums of sum |a_n/lambda_n| with a power-law tail fit.

    Divergence is flagged when the last half of the modes still contributes
    more than 5% of the running total.
    """
    a = np.asarray(a_n, dtype=float)
    lam = system.eigenvalues[: a.size]
    if a.size < 10:
        raise ValueError("need at least 10 modes for a summability report")
    terms = np.abs(a / lam)
    partial = np.cumsum(terms)
    total = float(partial[-1])
    half = a.size // 2
    growth = float(partial[-1] - partial[half - 1])
    divergent = total > 0 and growth > 0.05 * total

    # Power-law fit of the term decay over the last half (nonzero terms only).
    n_idx = np.arange(1, a.size + 1)
    mask = terms[half:] > 0
    if np.count_nonzero(mask) >= 3:
        slope = np.polyfit(np.log(n_idx[half:][mask]), np.log(terms[half:][mask]), 1)[0]
        tail_exponent = float(slope)
    else:
        tail_exponent = -math.inf
    return SummabilityReport(terms, partial, total, tail_exponent, divergent)


def weyl_growth_check(system: EigenSystem, dimension: int | None = None) -> float:
    """min_n lambda_n / n^(2/d): the empirical Weyl lower-bound constant."""
    d = dimension if dimension is not None else system.dimension
    lam = system.eigenvalues
    if lam.size < 10:
        raise ValueError("need at least 10 eigenvalues")
    n = np.arange(1, lam.size + 1, dtype=float)
    return float(np.min(lam / n ** (2.0 / d)))
