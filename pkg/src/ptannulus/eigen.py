"""Dense eigensolver with PT-aware post-processing.

Pipeline: balance -> Householder Hessenberg -> shifted QR (real double
shift for real input, complex single shift otherwise) -> optional inverse
iteration on the Hessenberg matrix for eigenvectors.

Operators built from a ``PotentialSpec`` are solved through their real form,
split into the two reflection sectors. Real arithmetic makes every complex
eigenvalue appear together with its exact conjugate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .operator import AngularOperator, reflection_sectors

RESIDUAL_TOL = 1e-8
EP_OVERLAP = 1 - 1e-4
_CLUSTER_TOL = 1e-7
_MAX_INVIT = 6


class EigenConvergenceError(RuntimeError):
    """QR iteration or inverse iteration failed to converge."""


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None  # columns aligned with eigenvalues
    defective: bool = False
    ep_pairs: list = field(default_factory=list)
    cutoff_M: int | None = None

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def max_imag(self) -> float:
        return max_imag(self)

    def m_values(self) -> np.ndarray:
        n = len(self.eigenvalues)
        if self.cutoff_M is None:
            return np.arange(n)
        return np.arange(-self.cutoff_M, self.cutoff_M + 1)

    def smallest(self, k: int) -> np.ndarray:
        """The ``k`` eigenvalues with smallest real part (already sorted)."""
        return self.eigenvalues[:k]

    def value_rows(self):
        return [(i, float(z.real), float(z.imag)) for i, z in enumerate(self.eigenvalues)]

    def vector_rows(self):
        if self.eigenvectors is None:
            return []
        ms = self.m_values()
        rows = []
        for j in range(self.eigenvectors.shape[1]):
            for i, c in enumerate(self.eigenvectors[:, j]):
                rows.append((j, int(ms[i]), float(c.real), float(c.imag)))
        return rows


def max_imag(spectrum) -> float:
    """Largest ``|Im|`` over a Spectrum or an array of eigenvalues."""
    vals = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    if vals.size == 0:
        raise ValueError("empty spectrum")
    return float(np.max(np.abs(vals.imag)))


def _sort_order(vals):
    return np.lexsort((vals.imag, vals.real))


def _validate(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix must have dimension >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has NaN or Inf entries")
    if np.iscomplexobj(a):
        if not np.any(a.imag):
            return np.ascontiguousarray(a.real, dtype=np.float64)
        return np.ascontiguousarray(a, dtype=np.complex128)
    return np.ascontiguousarray(a, dtype=np.float64)


def _reduce(a, want_q, backend):
    """Balance and reduce; returns (scale d, hessenberg h, q)."""
    k = kernels.get(backend)
    b = a.copy()
    d = k.balance(b)
    h, q = k.hessenberg(b, want_q)
    return d, h, q


def _qr_values(h, backend):
    k = kernels.get(backend)
    if h.dtype == np.float64:
        wr, wi, info = k.hqr_real(h.copy())
        vals = wr + 1j * wi
    else:
        vals, info = k.hqr_complex(h.copy())
    if info:
        raise EigenConvergenceError(f"QR iteration did not converge (block ending at row {info - 1})")
    return vals


def _inverse_iteration(h, vals, backend):
    """Eigenvectors of Hessenberg ``h`` for each value in ``vals``.

    Close eigenvalues form clusters. Each new member starts from a fresh
    deterministic random vector and is orthogonalised against the earlier
    members; if the orthogonalised vector is not an eigenvector the
    eigenspace is deficient there, so the plain vector is kept and the
    matrix is reported defective.
    """
    k = kernels.get(backend)
    n = h.shape[0]
    hc = np.ascontiguousarray(h, dtype=np.complex128)
    hnorm = max(float(np.abs(hc).sum(axis=0).max()), np.finfo(float).tiny)
    eps3 = np.finfo(float).eps * hnorm
    rng = np.random.default_rng(20240611)
    vecs = np.zeros((n, len(vals)), dtype=np.complex128)
    defective = False
    clusters: list[list[int]] = []
    for j, lam in enumerate(vals):
        members = next((c for c in clusters if abs(vals[c[0]] - lam) <= _CLUSTER_TOL * max(1.0, hnorm)), None)
        sigma = lam + eps3 * (len(members) if members else 0)
        start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = _invit(k, hc, sigma, start, eps3)
        if members:
            z = y.copy()
            for i in members:
                z -= np.vdot(vecs[:, i], z) * vecs[:, i]
            zn = np.linalg.norm(z)
            if zn > 1e-6:
                z /= zn
                if np.linalg.norm(hc @ z - lam * z) <= RESIDUAL_TOL * hnorm:
                    y = z
                else:
                    defective = True
            else:
                defective = True
            members.append(j)
        else:
            clusters.append([j])
        vecs[:, j] = y
    return vecs, defective


def _invit(k, hc, sigma, start, eps3):
    y = start / np.linalg.norm(start)
    hnorm = eps3 / np.finfo(float).eps
    for _ in range(_MAX_INVIT):
        y = k.hess_solve(hc, sigma, y, eps3)
        nrm = np.linalg.norm(y)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise EigenConvergenceError("inverse iteration broke down")
        y = y / nrm
        if np.linalg.norm(hc @ y - sigma * y) <= 1e-3 * RESIDUAL_TOL * hnorm:
            break
    return y


def _dense_values(a, backend):
    _, h, _ = _reduce(a, False, backend)
    return _qr_values(h, backend)


def _dense_pairs(a, backend):
    d, h, q = _reduce(a, True, backend)
    vals = _qr_values(h, backend)
    y, defective = _inverse_iteration(h, vals, backend)
    x = d[:, None] * (q @ y)
    x /= np.linalg.norm(x, axis=0)
    return vals, x, defective


def _operator_blocks(op: AngularOperator):
    r = op.real_form()
    return [(basis, basis.T @ r @ basis) for basis in reflection_sectors(op.cutoff_M) if basis.shape[1]]


def sector_eigvals(op: AngularOperator, backend: str | None = None) -> list[np.ndarray]:
    """Sorted eigenvalues of the even and the odd reflection sector separately."""
    out = []
    for _, block in _operator_blocks(op):
        vals = np.asarray(_dense_values(block, backend), dtype=np.complex128)
        out.append(vals[_sort_order(vals)])
    return out


def eigvals(matrix, backend: str | None = None) -> Spectrum:
    """All eigenvalues, sorted by real part then imaginary part."""
    if isinstance(matrix, AngularOperator):
        vals = np.concatenate(sector_eigvals(matrix, backend))
        cutoff = matrix.cutoff_M
    else:
        vals = _dense_values(_validate(matrix), backend)
        cutoff = None
    vals = np.asarray(vals, dtype=np.complex128)
    return Spectrum(vals[_sort_order(vals)], cutoff_M=cutoff)


def eigpairs(matrix, backend: str | None = None) -> Spectrum:
    """Eigenvalues with unit-norm eigenvectors (columns), plus EP diagnostics."""
    if isinstance(matrix, AngularOperator):
        a = matrix.entries
        parts, defective = [], False
        for basis, block in _operator_blocks(matrix):
            vals, y, bad = _dense_pairs(block, backend)
            parts.append((vals, matrix.to_original_basis(basis @ y)))
            defective |= bad
        vals = np.concatenate([p[0] for p in parts])
        vecs = np.concatenate([p[1] for p in parts], axis=1)
        cutoff = matrix.cutoff_M
    else:
        a = _validate(matrix)
        vals, vecs, defective = _dense_pairs(a, backend)
        cutoff = None
    order = _sort_order(vals)
    vals, vecs = vals[order], vecs[:, order]
    anorm = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    res = np.linalg.norm(a @ vecs - vecs * vals, axis=0)
    if np.any(res > RESIDUAL_TOL * anorm):
        raise EigenConvergenceError(f"eigenvector residual {res.max():.3e} exceeds {RESIDUAL_TOL} * |A|")
    ep_pairs = _ep_pairs(vals, vecs)
    return Spectrum(vals, vecs, defective or bool(ep_pairs), ep_pairs, cutoff)


def _ep_pairs(vals, vecs, window=None):
    """Index pairs of neighbouring eigenvalues whose eigenvectors are nearly parallel."""
    pairs = []
    n = len(vals)
    window = window or 4
    for i in range(n):
        for j in range(i + 1, min(n, i + 1 + window)):
            if abs(np.vdot(vecs[:, i], vecs[:, j])) > EP_OVERLAP:
                pairs.append((i, j))
    return pairs


def overlap(spectrum: Spectrum, i: int, j: int) -> float:
    """``|<v_i, v_j>|`` of two stored unit eigenvectors."""
    if spectrum.eigenvectors is None:
        raise ValueError("spectrum has no eigenvectors")
    v = spectrum.eigenvectors
    return float(abs(np.vdot(v[:, i], v[:, j])))


def residuals(matrix, spectrum: Spectrum) -> np.ndarray:
    a = matrix.entries if isinstance(matrix, AngularOperator) else np.asarray(matrix)
    v = spectrum.eigenvectors
    return np.linalg.norm(a @ v - v * spectrum.eigenvalues, axis=0)


def is_conjugate_closed(vals, tol: float = 1e-9) -> bool:
    """Multiset of ``vals`` equals its conjugate within ``tol`` (after sorting)."""
    vals = np.asarray(vals)
    a = vals[_sort_order(vals)]
    c = np.conj(vals)
    b = c[_sort_order(c)]
    return bool(np.max(np.abs(a - b), initial=0.0) <= tol) if math.isfinite(tol) else False
