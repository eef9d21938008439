"""Temporal source factors mu(t) supported on [0, t0].

The preferred representation is a piecewise polynomial: every quantity the
rest of the library needs from mu (values, signed moments, the L1 norm) is
then available in closed form, segment by segment.  A sampled fallback with
trapezoid quadrature is provided for data that arrives as plain arrays; its
accuracy is limited by the sample spacing and it is documented as such.

Signed moments follow the convention

    moment(m) = integral_0^t0 (-s)^m mu(s) ds,

so for mu >= 0 the moments alternate in sign.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "PolySegment",
    "PiecewisePolynomial",
    "SampledFactor",
    "SourceSpec",
    "constant_mu",
    "polynomial_mu",
]


@dataclass(frozen=True)
class PolySegment:
    """Polynomial piece sum_j coeffs[j] * s**j valid on [lo, hi)."""

    lo: float
    hi: float
    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise ValueError(f"segment must have hi > lo, got [{self.lo}, {self.hi}]")
        if len(self.coeffs) == 0:
            raise ValueError("segment needs at least one coefficient")

    def value(self, s):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def signed_moment(self, m: int) -> float:
        """integral_lo^hi (-s)^m * poly(s) ds, exact."""
        sign = -1.0 if m % 2 else 1.0
        total = [
            c * (self.hi ** (m + j + 1) - self.lo ** (m + j + 1)) / (m + j + 1)
            for j, c in enumerate(self.coeffs)
        ]
        return sign * math.fsum(total)

    def abs_integral(self) -> float:
        """integral_lo^hi |poly(s)| ds, exact via sign-change splitting."""
        pts = [self.lo, self.hi]
        if len(self.coeffs) > 1:
            roots = np.roots(list(reversed(self.coeffs)))
            for r in roots:
                if abs(r.imag) < 1e-14 * max(1.0, abs(r.real)):
                    x = float(r.real)
                    if self.lo < x < self.hi:
                        pts.append(x)
        pts.sort()
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            piece = math.fsum(
                c * (b ** (j + 1) - a ** (j + 1)) / (j + 1)
                for j, c in enumerate(self.coeffs)
            )
            total += abs(piece)
        return total


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Piecewise-polynomial temporal factor, zero outside [0, t0].

    Segments must tile [0, t0] without gaps or overlaps.
    """

    segments: tuple[PolySegment, ...]
    _breaks: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        segs = tuple(sorted(self.segments, key=lambda s: s.lo))
        if not segs:
            raise ValueError("need at least one segment")
        if segs[0].lo < 0.0:
            raise ValueError("segments must start at s >= 0")
        for a, b in zip(segs[:-1], segs[1:]):
            if not math.isclose(a.hi, b.lo, rel_tol=0.0, abs_tol=1e-15 * max(1.0, a.hi)):
                raise ValueError(f"segments must tile contiguously; gap at s={a.hi}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_breaks", tuple(s.lo for s in segs))

    @property
    def t0(self) -> float:
        return self.segments[-1].hi

    def breakpoints(self) -> tuple[float, ...]:
        return self._breaks + (self.t0,)

    def _segment_at(self, s: float) -> PolySegment | None:
        if s < self.segments[0].lo or s > self.t0:
            return None
        i = bisect.bisect_right(self._breaks, s) - 1
        i = max(i, 0)
        return self.segments[i]

    def __call__(self, s):
        if np.ndim(s) == 0:
            seg = self._segment_at(float(s))
            return 0.0 if seg is None else seg.value(float(s))
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for seg in self.segments:
            mask = (s >= seg.lo) & (s <= seg.hi) if seg is self.segments[-1] else (
                (s >= seg.lo) & (s < seg.hi)
            )
            out[mask] = seg.value(s[mask])
        return out

    def moment(self, m: int) -> float:
        """Signed moment integral_0^t0 (-s)^m mu(s) ds, exact."""
        if m < 0:
            raise ValueError("moment index must be >= 0")
        return math.fsum(seg.signed_moment(m) for seg in self.segments)

    def l1_norm(self) -> float:
        """||mu||_{L1(0,t0)}, exact."""
        return math.fsum(seg.abs_integral() for seg in self.segments)

    def scale(self, factor: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(
            tuple(
                PolySegment(s.lo, s.hi, tuple(factor * c for c in s.coeffs))
                for s in self.segments
            )
        )


@dataclass(frozen=True)
class SampledFactor:
    """Sampled temporal factor on [0, t0]; trapezoid quadrature throughout.

    Moments and the L1 norm carry the O(h^2) error of the trapezoid rule;
    use PiecewisePolynomial whenever exact moments matter.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least two samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if t[0] < 0:
            raise ValueError("sample times must start at s >= 0")
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")

    @property
    def t0(self) -> float:
        return self.times[-1]

    def breakpoints(self) -> tuple[float, ...]:
        return (self.times[0], self.t0)

    def __call__(self, s):
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        out = np.interp(s, t, v, left=0.0, right=0.0)
        if np.ndim(s) == 0:
            return float(out)
        return out

    def moment(self, m: int) -> float:
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        return float(np.trapezoid((-t) ** m * v, t))

    def l1_norm(self) -> float:
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        return float(np.trapezoid(np.abs(v), t))


TemporalFactor = Union[PiecewisePolynomial, SampledFactor]


def constant_mu(value: float, t0: float) -> PiecewisePolynomial:
    """mu(s) = value on (0, t0)."""
    return PiecewisePolynomial((PolySegment(0.0, t0, (value,)),))


def polynomial_mu(coeffs: Sequence[float], t0: float) -> PiecewisePolynomial:
    """mu(s) = sum_j coeffs[j] s^j on (0, t0)."""
    return PiecewisePolynomial((PolySegment(0.0, t0, tuple(float(c) for c in coeffs)),))


@dataclass(frozen=True)
class SourceSpec:
    """Separable source mu(t) f(x): temporal factor plus spatial profile.

    mu vanishes for t > t0 by construction; profile is a SpatialProfile
    from the spectral module (or None when only the temporal factor is
    exercised).
    """

    mu: TemporalFactor
    t0: float
    profile: object | None = None

    def __post_init__(self) -> None:
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not math.isclose(self.mu.t0, self.t0, rel_tol=1e-12):
            raise ValueError(
                f"temporal factor support [{self.mu.t0}] does not match t0={self.t0}"
            )

    def mu_l1(self) -> float:
        return self.mu.l1_norm()
