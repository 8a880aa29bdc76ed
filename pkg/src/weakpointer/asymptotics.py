"""Single-Gaussian approximations of two-Gaussian superpositions.

For ``F(f) = A exp(-(f-a)^2/dF^2) + B exp(-(f-b)^2/dF^2)`` and ``dF >> |b-a|``,
F is close to ``(A+B) exp(-(f-z)^2/dF^2)`` with ``z = (aA + bB)/(A + B)``.
This module provides the limit shifts (real, complex, 2-D), the leading
error law, the second-moment gap, the extremum structure of F with its
fold/pitchfork, and the tail bound on attributing a reading to one term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize, special

WINDOW = (-5.0, 6.0)
GRID_STEP = 1e-3
ROOT_XTOL = 1e-10


@dataclass(frozen=True)
class RealSuperposition:
    A: float
    B: float
    a: float
    b: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        w = self.width
        return self.A * np.exp(-((f - self.a) / w) ** 2) + self.B * np.exp(-((f - self.b) / w) ** 2)

    def approximation(self, f):
        """The single Gaussian (A+B) exp(-(f-z)^2/dF^2)."""
        z = limit_shift_real(self)
        f = np.asarray(f, dtype=float)
        return (self.A + self.B) * np.exp(-((f - z) / self.width) ** 2)


@dataclass(frozen=True)
class ComplexSuperposition:
    """``|A exp(-(f-a)^2/dF^2) + B exp(-(f-b)^2/dF^2)|^2`` with complex A, B."""

    A: complex
    B: complex
    a: float
    b: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        object.__setattr__(self, "A", complex(self.A))
        object.__setattr__(self, "B", complex(self.B))

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        w = self.width
        amp = self.A * np.exp(-((f - self.a) / w) ** 2) + self.B * np.exp(-((f - self.b) / w) ** 2)
        return np.abs(amp) ** 2

    def approximation(self, f):
        """|A+B|^2 exp(-2 (f - Re z)^2 / dF^2)."""
        z = limit_shift_complex(self)
        f = np.asarray(f, dtype=float)
        return abs(self.A + self.B) ** 2 * np.exp(-2.0 * ((f - z) / self.width) ** 2)


def _limit_ratio(A, B, a, b):
    if A + B == 0:
        raise ZeroDivisionError("A + B = 0: the superposition has no limiting shift")
    return (a * A + b * B) / (A + B)


def limit_shift_real(s: RealSuperposition) -> float:
    """Location of the single maximum of F as the width grows.

    Lies outside [a, b] when A and B have opposite signs.
    """
    return float(_limit_ratio(s.A, s.B, s.a, s.b))


def limit_shift_complex(s: ComplexSuperposition) -> float:
    return complex(_limit_ratio(s.A, s.B, s.a, s.b)).real


def limit_shift_2d(A: complex, B: complex, a_vec, b_vec) -> np.ndarray:
    """Component-wise limit shift of a 2-D superposition (real part if complex)."""
    a_vec = np.asarray(a_vec, dtype=float)
    b_vec = np.asarray(b_vec, dtype=float)
    if a_vec.shape != (2,) or b_vec.shape != (2,):
        raise ValueError("centers must be 2-vectors")
    # plain Python scalars so each component equals the 1-D result bit for bit
    A, B = complex(A), complex(B)
    return np.array([complex(_limit_ratio(A, B, float(a), float(b))).real for a, b in zip(a_vec, b_vec)])


def relative_error(s: RealSuperposition, f: float) -> float:
    """Leading-order estimate of |F - F~| / F at ``f``.

    ``(b-a)^2 |2x^2 - 1| / dF^2 * |AB / (A+B)^2|`` with ``x = f / dF``;
    scales as dF**-2 at fixed x.
    """
    if float(s(f)) == 0.0:
        raise ZeroDivisionError(f"F vanishes at f={f}; the relative error has a pole there")
    if s.A + s.B == 0:
        raise ZeroDivisionError("A + B = 0")
    x = f / s.width
    return (s.b - s.a) ** 2 * abs(2 * x * x - 1) / s.width**2 * abs(s.A * s.B / (s.A + s.B) ** 2)


def second_moment_gap(s: RealSuperposition) -> float:
    """AB (a-b)^2 / (A+B).

    This is the difference of second moments of F and its single-Gaussian
    approximation when both are normalized by the same per-unit-weight
    factor; for weights with A + B = 1 (a normalized mixture) it equals the
    gap between the normalized moments.  In general the normalized gap is
    ``second_moment_gap(s) / (A + B)``, see :func:`normalized_second_moment_gap`.
    """
    if s.A + s.B == 0:
        raise ZeroDivisionError("A + B = 0")
    return s.A * s.B * (s.a - s.b) ** 2 / (s.A + s.B)


def normalized_second_moment_gap(s: RealSuperposition) -> float:
    """<f^2>_F - <f^2>_F~ with moments normalized by the integral of each function."""
    return second_moment_gap(s) / (s.A + s.B)


# extrema of F with a = 0, b = 1, A = 1, B = R


def _log_terms(f, R: float, width: float):
    # dF/df = -(2/width^2) (t1 + t2), t1 = f e^{-f^2/w^2}, t2 = R (f-1) e^{-(f-1)^2/w^2};
    # work with logs so narrow widths do not underflow
    f = np.asarray(f, dtype=float)
    with np.errstate(divide="ignore"):
        l1 = np.log(np.abs(f)) - (f / width) ** 2
        l2 = np.log(np.abs(R * (f - 1.0))) - ((f - 1.0) / width) ** 2
    return np.sign(f), l1, np.sign(R * (f - 1.0)), l2


def scaled_slope(f, R: float, width: float):
    """A positive multiple of -dF/df, free of underflow; same zeros as dF/df."""
    s1, l1, s2, l2 = _log_terms(f, R, width)
    top = np.maximum(l1, l2)
    with np.errstate(invalid="ignore"):
        out = s1 * np.exp(l1 - top) + s2 * np.exp(l2 - top)
    return np.where(np.isneginf(top), 0.0, out)


class Extremum(NamedTuple):
    location: float
    kind: str  # "max" or "min"


def scan_extrema(R: float, width: float, window=WINDOW, step: float = GRID_STEP) -> list[Extremum]:
    """All extrema of ``exp(-f^2/w^2) + R exp(-(f-1)^2/w^2)`` inside ``window``.

    Sign changes of the slope on a grid of spacing ``step`` are refined with
    Brent's method to ``ROOT_XTOL``.
    """
    if not width > 0:
        raise ValueError("width must be positive")
    lo, hi = window
    n = int(round((hi - lo) / step)) + 1
    grid = np.linspace(lo, hi, n)
    h = scaled_slope(grid, R, width)
    sgn = np.sign(h)
    out: list[Extremum] = []

    def fun(x):
        return float(scaled_slope(x, R, width))

    i = 0
    while i < n - 1:
        if sgn[i] == 0:
            # exact grid hit: classify from the nearest nonzero neighbours
            left = sgn[i - 1] if i > 0 else 0
            right = sgn[i + 1]
            if left != 0 and right != 0 and left != right:
                out.append(Extremum(float(grid[i]), "max" if left < 0 else "min"))
            i += 1
            continue
        if sgn[i + 1] != 0 and sgn[i] != sgn[i + 1]:
            x = optimize.brentq(fun, grid[i], grid[i + 1], xtol=ROOT_XTOL)
            # h is proportional to -F'; h rising through zero means F' falls: a maximum
            out.append(Extremum(float(x), "max" if sgn[i] < 0 else "min"))
        i += 1
    return out


def count_extrema(R: float, width: float, **kw) -> int:
    return len(scan_extrema(R, width, **kw))


def critical_width(R: float, lo: float = 1e-3, hi: float = 10.0, tol: float = 1e-6) -> float:
    """Width at which the extremum count drops from 3 to 1, by bisection."""
    if not R > 0:
        raise ValueError("critical_width needs R > 0; scan R < 0 with scan_extrema")
    n_lo, n_hi = count_extrema(R, lo), count_extrema(R, hi)
    if not (n_lo == 3 and n_hi == 1):
        raise RuntimeError(f"no 3 -> 1 transition in ({lo}, {hi}) for R={R} (counts {n_lo}, {n_hi})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count_extrema(R, mid) >= 3:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def symmetric_curvature(width: float) -> float:
    """Second derivative of F at f = 1/2 for R = 1; changes sign at width sqrt(1/2)."""
    return -4.0 * math.exp(-1.0 / (4.0 * width**2)) / width**4 * (width**2 - 0.5)


@dataclass
class ExtremaDiagram:
    R: float
    widths: np.ndarray
    extrema: list[list[Extremum]]
    critical_width: float | None = None

    def rows(self):
        for w, ex in zip(self.widths, self.extrema):
            for e in ex:
                yield self.R, float(w), e.location, e.kind


def extrema_diagram(R: float, widths, with_critical: bool = True) -> ExtremaDiagram:
    widths = np.asarray(widths, dtype=float)
    ex = [scan_extrema(R, w) for w in widths]
    crit = critical_width(R) if with_critical and R > 0 else None
    return ExtremaDiagram(R, widths, ex, crit)


# which-way attribution


class AttributionBound(NamedTuple):
    threshold: float
    bound: float


def attribution_bound(width: float, c: float, eps: float) -> AttributionBound:
    """Threshold reading beyond which the shifted term dominates by 1/eps, and
    an upper bound on the probability of landing there.

    For the equal-weight mixture of Gaussians centered at 0 and c,
    ``P(f > f_eps) < erfc((f_eps - c) / dF) / 2``.
    """
    if not c > 0 or not 0 < eps < 1 or not width > 0:
        raise ValueError("need c > 0, 0 < eps < 1 and width > 0")
    f_eps = width**2 * abs(math.log(eps)) / (2 * c) + c / 2
    return AttributionBound(f_eps, 0.5 * float(special.erfc((f_eps - c) / width)))


def attribution_bound_asymptote(width: float, c: float, eps: float) -> float:
    """Large-width form of the bound: c / (2 sqrt(pi) dF |ln eps|) exp(-dF^2 ln^2 eps / (4 c^2))."""
    L = abs(math.log(eps))
    return c / (2 * math.sqrt(math.pi) * width * L) * math.exp(-(width**2) * L**2 / (4 * c * c))


def two_term_density(f, width: float, c: float):
    """Equal-weight mixture of classical pointer Gaussians at 0 and c."""
    f = np.asarray(f, dtype=float)
    return (np.exp(-(f / width) ** 2) + np.exp(-((f - c) / width) ** 2)) / (2 * width * math.sqrt(math.pi))


__all__ = [
    "AttributionBound",
    "ComplexSuperposition",
    "ExtremaDiagram",
    "Extremum",
    "RealSuperposition",
    "attribution_bound",
    "attribution_bound_asymptote",
    "count_extrema",
    "critical_width",
    "extrema_diagram",
    "limit_shift_2d",
    "limit_shift_complex",
    "limit_shift_real",
    "normalized_second_moment_gap",
    "relative_error",
    "scan_extrema",
    "scaled_slope",
    "second_moment_gap",
    "symmetric_curvature",
    "two_term_density",
]
