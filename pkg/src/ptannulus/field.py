"""Eigenfunctions ``Psi = R(rho) Phi(phi)`` and their densities.

``Phi(phi) = sum_m c_m e^{i m phi}`` comes from an eigenvector of the angular
matrix; ``R`` is the Bessel solution of order ``alpha = sqrt(alpha^2)``. The
separation is exact, so one real ``alpha^2`` fixes the radial factor even
when ``Phi`` mixes many ``m``.

A gain-loss term ``-i beta cos(n phi)`` with ``beta > 0`` has gain where
``cos(n phi) < 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import io
from .eigen import eigpairs
from .operator import PotentialSpec, build
from .radial import Geometry, RadialMode, alpha_from_alpha_sq

WEIGHT_POINTS = 4096


@dataclass
class AngularMode:
    coefficients: np.ndarray  # c_m for m = -M..M
    alpha_sq: complex

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coefficients must be a vector of odd length 2M+1")
        nrm = np.linalg.norm(c)
        if nrm == 0:
            raise ValueError("zero coefficient vector")
        self.coefficients = c / nrm
        self.alpha_sq = complex(self.alpha_sq)

    @property
    def cutoff_M(self) -> int:
        return (self.coefficients.size - 1) // 2

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.cutoff_M, self.cutoff_M + 1)


def angular_modes(spec: PotentialSpec, cutoff_M: int = 100) -> list[AngularMode]:
    """Eigenmodes of the angular matrix, ordered like the sorted spectrum.

    Each vector lies in one reflection sector, so degenerate partners from
    the two sectors never mix.
    """
    sp = eigpairs(build(spec, cutoff_M))
    return [AngularMode(sp.eigenvectors[:, j], sp.eigenvalues[j]) for j in range(len(sp))]


def uniform_phi(count: int, midpoint: bool = False) -> np.ndarray:
    k = np.arange(count) + (0.5 if midpoint else 0.0)
    return 2 * np.pi * k / count


def angular_profile(mode: AngularMode, phi) -> np.ndarray:
    """Direct Fourier synthesis of ``Phi`` at the given angles."""
    phi = np.asarray(phi, dtype=float)
    return np.exp(1j * np.multiply.outer(phi, mode.m_values)) @ mode.coefficients


def parseval(mode: AngularMode, points: int = 1024) -> float:
    """``(1/2pi) int |Phi|^2 dphi`` by the uniform trapezoid rule."""
    return float(np.mean(np.abs(angular_profile(mode, uniform_phi(points))) ** 2))


def pi_rotation_asymmetry(mode: AngularMode, points: int = 1024) -> float:
    """``max_phi | |Phi(phi)|^2 - |Phi(phi + pi)|^2 |`` on a uniform grid."""
    phi = uniform_phi(points)
    d0 = np.abs(angular_profile(mode, phi)) ** 2
    d1 = np.abs(angular_profile(mode, phi + np.pi)) ** 2
    return float(np.max(np.abs(d0 - d1)))


def gain_loss_weights(mode: AngularMode, n: int, points: int = WEIGHT_POINTS) -> tuple[float, float]:
    """Angular weight in the gain (``cos n phi < 0``) and loss (``cos n phi > 0``) regions.

    Midpoint nodes never land on ``cos(n phi) = 0`` for odd ``n`` and even
    ``points``, so every node belongs to exactly one region.
    """
    phi = uniform_phi(points, midpoint=True)
    dens = np.abs(angular_profile(mode, phi)) ** 2
    c = np.cos(n * phi)
    return float(dens[c < 0].sum() / points), float(dens[c > 0].sum() / points)


@dataclass
class DensityField:
    rho_grid: np.ndarray
    phi_grid: np.ndarray
    values: np.ndarray  # values[i, j] at (rho_grid[i], phi_grid[j])
    meta: dict = field(default_factory=dict)

    def integral(self) -> float:
        return polar_integral(self.rho_grid, self.phi_grid, self.values)

    def rows(self):
        for i, r in enumerate(self.rho_grid):
            for j, p in enumerate(self.phi_grid):
                yield (float(r), float(p), float(self.values[i, j]))

    def write(self, prefix):
        io.write_csv(f"{prefix}.csv", ["rho", "phi", "density"], self.rows())
        io.write_json(f"{prefix}.json", {**self.meta, "columns": ["rho", "phi", "density"],
                                         "n_rho": len(self.rho_grid), "n_phi": len(self.phi_grid)})


def polar_integral(rho, phi, values) -> float:
    """Trapezoid in rho with weight rho, periodic trapezoid (a plain mean) in phi."""
    ang = values.mean(axis=1) * 2 * np.pi
    f = ang * rho
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(rho)))


def density(mode: AngularMode, geometry: Geometry = Geometry(), q: int = 1,
            n_rho: int = 256, n_phi: int = 512, meta: dict | None = None) -> DensityField:
    """Normalised ``|R(rho) Phi(phi)|^2`` on a closed polar grid ``[a_ratio, 1] x [0, 2pi)``.

    Only real ``alpha^2 >= 0`` is accepted; the broken phase would need
    complex-order Bessel functions.
    """
    alpha = alpha_from_alpha_sq(mode.alpha_sq)
    kappa = geometry.zeros(alpha, q)[q - 1] * geometry.a_outer  # in units of 1/a_outer
    rmode = RadialMode(alpha, q, kappa, kappa * kappa, Geometry(geometry.a_ratio, 1.0))
    rho = np.linspace(geometry.a_ratio, 1.0, n_rho)
    phi = uniform_phi(n_phi)
    radial = rmode.radial(rho)
    values = np.abs(radial)[:, None] ** 2 * np.abs(angular_profile(mode, phi))[None, :] ** 2
    values /= polar_integral(rho, phi, values)
    info = {"alpha_sq": [mode.alpha_sq.real, mode.alpha_sq.imag], "alpha": alpha, "q": q, "kappa": kappa,
            "geometry": geometry.to_dict(), "cutoff_M": mode.cutoff_M, "normalization": "polar_trapezoid"}
    info.update(meta or {})
    return DensityField(rho, phi, values, info)


def isotropy_ratio(mode: AngularMode, points: int = 1024) -> float:
    """``max |Phi|^2 / min |Phi|^2``; 1 for an isotropic profile."""
    d = np.abs(angular_profile(mode, uniform_phi(points))) ** 2
    return float(d.max() / d.min()) if d.min() > 0 else math.inf
