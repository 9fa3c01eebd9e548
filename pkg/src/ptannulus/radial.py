"""Radial sector: Bessel functions of real order, their zeros, and ``E(alpha, q)``.

Lengths are in units of the outer radius and energies in units of
``hbar^2 / (2 mu a_out^2)``, so ``E = kappa^2``.

Bessel values come from ``scipy.special`` (Amos/Cephes). This module only
adds argument checks, zero bracketing and the annulus condition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.optimize import brentq

X_MAX = 200.0
STRIDE = math.pi / 2


class RangeError(ValueError):
    """Argument outside the supported range (order >= 0, 0 <= x <= 200)."""


def _check_order(alpha):
    a = np.asarray(alpha)
    if np.iscomplexobj(a) or not np.all(np.isfinite(a)) or np.any(a < 0):
        raise RangeError(f"order must be real, finite and >= 0, got {alpha!r}")


def _check_x(x, positive=False):
    v = np.asarray(x)
    if np.iscomplexobj(v) or not np.all(np.isfinite(v)):
        raise RangeError(f"argument must be real and finite, got {x!r}")
    if np.any(v > X_MAX):
        raise RangeError(f"argument {x!r} beyond supported ceiling x <= {X_MAX}")
    if positive and np.any(v <= 0):
        raise RangeError(f"Y is singular at x <= 0, got {x!r}")
    if np.any(v < 0):
        raise RangeError(f"argument must be >= 0, got {x!r}")


def bessel_j(alpha, x):
    """J_alpha(x) for real ``alpha >= 0`` and ``0 <= x <= 200``."""
    _check_order(alpha)
    _check_x(x)
    out = special.jv(alpha, x)
    return float(out) if np.ndim(out) == 0 else out


def bessel_y(alpha, x):
    """Y_alpha(x) for real ``alpha >= 0`` and ``0 < x <= 200``."""
    _check_order(alpha)
    _check_x(x, positive=True)
    out = special.yv(alpha, x)
    return float(out) if np.ndim(out) == 0 else out


def _roots(f, start, count, what):
    """First ``count`` sign changes of ``f`` on ``[start, X_MAX]`` with a pi/2 stride, refined by Brent."""
    roots = []
    a, fa = start, f(start)
    while len(roots) < count:
        if a >= X_MAX:
            raise RangeError(f"only {len(roots)} of {count} {what} found below x = {X_MAX}")
        b = min(a + STRIDE, X_MAX)
        fb = f(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))
        a, fa = b, fb
    return roots


def disc_zeros(alpha: float, count: int) -> list[float]:
    """First ``count`` positive zeros of J_alpha (disc of unit radius)."""
    _check_order(alpha)
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    # J_alpha > 0 on (0, j_{alpha,1}) and j_{alpha,1} > alpha, so start there
    start = float(alpha) if alpha > 0 else 0.0
    return _roots(lambda k: special.jv(alpha, k), start, int(count), f"zeros of J_{alpha}")


def cross_product(alpha: float, a_ratio: float, kappa):
    """``J(k a) Y(k) - J(k) Y(k a)`` divided by the Bessel modulus at ``k a`` (same zeros, no overflow)."""
    x = kappa * a_ratio
    ja, ya = special.jv(alpha, x), special.yv(alpha, x)
    mod = np.hypot(ja, ya)
    return (ja * special.yv(alpha, kappa) - special.jv(alpha, kappa) * ya) / mod


def annulus_zeros(alpha: float, a_ratio: float, count: int) -> list[float]:
    """First ``count`` positive roots of the annulus condition, in units of 1/a_out."""
    _check_order(alpha)
    if not 0 < a_ratio < 1:
        raise ValueError("a_ratio must lie in (0, 1)")
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")

    def f(k):
        v = cross_product(alpha, a_ratio, k)
        if not np.isfinite(v):
            raise RangeError(f"annulus condition not finite at kappa={k!r} (order too large for a_ratio)")
        return v

    # annulus roots exceed the disc ones, and j_{alpha,1} > max(alpha, 2.4)
    start = max(float(alpha), 1.0)
    return _roots(f, start, int(count), "annulus roots")


@dataclass(frozen=True)
class Geometry:
    a_inner: float = 0.0
    a_outer: float = 1.0

    def __post_init__(self):
        if not (self.a_outer > 0 and 0 <= self.a_inner < self.a_outer):
            raise ValueError(f"need 0 <= a_inner < a_outer, got {self.a_inner}, {self.a_outer}")

    @property
    def a_ratio(self) -> float:
        return self.a_inner / self.a_outer

    @property
    def is_disc(self) -> bool:
        return self.a_inner == 0

    def zeros(self, alpha: float, count: int) -> list[float]:
        """kappa values in units of 1/(length unit of a_outer)."""
        base = disc_zeros(alpha, count) if self.is_disc else annulus_zeros(alpha, self.a_ratio, count)
        return [k / self.a_outer for k in base]

    def to_dict(self):
        return {"a_inner": self.a_inner, "a_outer": self.a_outer}


@dataclass(frozen=True)
class RadialMode:
    alpha: float
    q: int
    kappa: float
    energy: float
    geometry: Geometry = Geometry()

    def radial(self, rho):
        """Radial factor (unnormalised) vanishing at both walls."""
        rho = np.asarray(rho, dtype=float)
        k = self.kappa
        if self.geometry.is_disc:
            return special.jv(self.alpha, k * rho)
        a = self.geometry.a_inner
        return special.jv(self.alpha, k * rho) * special.yv(self.alpha, k * a) - \
            special.jv(self.alpha, k * a) * special.yv(self.alpha, k * rho)


def alpha_from_alpha_sq(alpha_sq, tol: float = 1e-9) -> float:
    """Bessel order from a real, non-negative ``alpha^2``; complex values are rejected."""
    z = complex(alpha_sq)
    if abs(z.imag) > tol * max(1.0, abs(z.real)):
        raise ValueError(f"alpha^2 = {alpha_sq!r} is complex: radial quantisation needs complex order")
    if z.real < -tol:
        raise ValueError(f"alpha^2 = {alpha_sq!r} is negative: imaginary order is not supported")
    return math.sqrt(max(z.real, 0.0))


def energies(alpha_list, q_max: int, geometry: Geometry = Geometry()) -> list[RadialMode]:
    """All modes with ``q <= q_max`` for each order, sorted by energy (then alpha, q)."""
    if int(q_max) != q_max or q_max < 1:
        raise ValueError("q_max must be a positive integer")
    modes = []
    for alpha in alpha_list:
        if isinstance(alpha, complex) or np.iscomplexobj(alpha):
            if complex(alpha).imag != 0:
                raise ValueError(f"complex order {alpha!r} is out of scope")
            alpha = complex(alpha).real
        _check_order(alpha)
        for q, k in enumerate(geometry.zeros(float(alpha), int(q_max)), start=1):
            modes.append(RadialMode(float(alpha), q, k, k * k, geometry))
    modes.sort(key=lambda m: (m.energy, m.alpha, m.q))
    return modes


def mode_rows(modes):
    return [(m.alpha, m.q, m.kappa, m.energy) for m in modes]
