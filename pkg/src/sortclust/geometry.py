"""Special functions and equal-radius ball volume formulas.

Everything in this module is plain scalar float arithmetic. The continued
fractions and series are written out directly instead of pulled from scipy so
that the package stays dependency-light and the convergence behaviour is
pinned down in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = 1e-15        # convergence threshold for series / continued fractions
_FPMIN = 1e-300     # keeps the modified Lentz recurrences away from 0
_MAX_ITER = 500
_MAX_LINEAR_DIM = 300   # above this, plain volumes under/overflow; use the log forms


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball of a given radius around a center point."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("ball radius must be positive")

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of the rows of `points` inside the ball (boundary included)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        diff = pts - np.asarray(self.center, dtype=np.float64)
        return np.einsum("ij,ij->i", diff, diff) <= self.radius * self.radius


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ValueError(f"incomplete beta continued fraction failed to converge "
                     f"(a={a}, b={b}, x={x})")


def reg_inc_beta(s: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_s(a, b) for s in [0, 1], a > 0, b > 0."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("beta parameters must be positive")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    if s == 0.0:
        return 0.0
    if s == 1.0:
        return 1.0
    front = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                     + a * math.log(s) + b * math.log1p(-s))
    # Symmetry switch: the continued fraction converges fast only on one side.
    if s < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, s) / a
    return 1.0 - front * _betacf(b, a, 1.0 - s) / b


def _gamma_series(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ValueError(f"incomplete gamma series failed to converge (a={a}, x={x})")


def _gamma_cf(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ValueError(f"incomplete gamma continued fraction failed to converge "
                     f"(a={a}, x={x})")


def reg_inc_gamma_lower(x: float, a: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for x >= 0, a > 0.

    P(a, x) is the chi-square CDF with 2a degrees of freedom evaluated at 2x.
    """
    if a <= 0.0:
        raise ValueError("gamma parameter must be positive")
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 0.0
    # Series converges fast left of the mean, continued fraction right of it.
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def _check_ball_args(radius: float, d: int) -> None:
    if not radius > 0.0 or not math.isfinite(radius):
        raise ValueError("radius must be positive and finite")
    if int(d) != d or d < 1:
        raise ValueError("dimension must be a positive integer")


def log_ball_volume(radius: float, d: int) -> float:
    """log of the volume of a d-dimensional ball; valid for any dimension."""
    _check_ball_args(radius, d)
    return 0.5 * d * math.log(math.pi) + d * math.log(radius) - math.lgamma(0.5 * d + 1.0)


def ball_volume(radius: float, d: int) -> float:
    """Volume of a d-dimensional ball, pi^(d/2) radius^d / Gamma(d/2 + 1)."""
    _check_ball_args(radius, d)
    if d > _MAX_LINEAR_DIM:
        raise ValueError(f"d={d} > {_MAX_LINEAR_DIM}: use log_ball_volume")
    v = math.exp(log_ball_volume(radius, d))
    if v == 0.0 or math.isinf(v):
        raise OverflowError(f"ball volume not representable for radius={radius}, d={d}; "
                            "use log_ball_volume")
    return v


def overlap_fraction(dist: float, radius: float, d: int) -> float:
    """Intersection volume of two equal d-balls divided by one ball's volume.

    This is I_s((d+1)/2, 1/2) with s = 1 - dist^2/(4 radius^2), i.e. twice the
    relative volume of the spherical cap cut off at half the center distance.
    The first beta parameter has to be (d+1)/2: the superficially plausible
    d/2+1 already fails the d=1 check, where the overlap of two unit-length
    intervals at distance t is exactly 2-t.
    """
    _check_ball_args(radius, d)
    if dist < 0.0:
        raise ValueError("dist must be nonnegative")
    if dist >= 2.0 * radius:
        return 0.0
    s = 1.0 - (dist * dist) / (4.0 * radius * radius)
    s = min(max(s, 0.0), 1.0)
    return reg_inc_beta(s, 0.5 * (d + 1.0), 0.5)


def intersection_volume(dist: float, radius: float, d: int) -> float:
    """Volume of the intersection of two d-balls of equal radius."""
    frac = overlap_fraction(dist, radius, d)
    if frac == 0.0:
        return 0.0
    return ball_volume(radius, d) * frac


def union_volume(dist: float, radius: float, d: int) -> float:
    """Volume of the union of two d-balls of equal radius."""
    return 2.0 * ball_volume(radius, d) - intersection_volume(dist, radius, d)


def log_intersection_volume(dist: float, radius: float, d: int) -> float:
    """log of the intersection volume; -inf when the balls do not overlap."""
    frac = overlap_fraction(dist, radius, d)
    if frac == 0.0:
        return float("-inf")
    return log_ball_volume(radius, d) + math.log(frac)


def log_union_volume(dist: float, radius: float, d: int) -> float:
    """log of the union volume; well-defined in any dimension."""
    frac = overlap_fraction(dist, radius, d)
    return log_ball_volume(radius, d) + math.log(2.0 - frac)
