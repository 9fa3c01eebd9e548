"""Spectral tools for PT-symmetric Hamiltonians on a disc or annulus.

Gain-loss potentials ``-i beta cos(n phi) / rho^2`` and Hermitian potentials
``-lam cos(p phi) / rho^2`` separate in polar coordinates. The angular part
becomes a banded matrix in the ``e^{i m phi}`` basis whose eigenvalues
``alpha^2`` decide whether the full spectrum is real.
"""
from .operator import (AngularOperator, GainLossTerm, HermitianTerm, PotentialSpec, SpecError,
                       build, reduced_block)
from .eigen import EigenConvergenceError, Spectrum, eigpairs, eigvals, max_imag

__version__ = "0.1.0"

__all__ = [
    "AngularOperator", "GainLossTerm", "HermitianTerm", "PotentialSpec", "SpecError", "build",
    "reduced_block", "EigenConvergenceError", "Spectrum", "eigpairs", "eigvals", "max_imag",
]
