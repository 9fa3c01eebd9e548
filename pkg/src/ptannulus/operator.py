"""Angular-momentum matrix of the polar equation.

Row/column index ``i`` in ``[0, 2M]`` maps to angular momentum ``m = i - M``.
Strengths are dimensionless (hbar^2 / 2 mu = 1).

A gain-loss term ``V_n = -i beta cos(n phi) / rho^2`` (n odd) contributes
``-i beta / 2`` on the bands ``|m - m'| = n``; a Hermitian term
``U_p = -lam cos(p phi) / rho^2`` (p even) contributes ``-lam / 2`` on
``|m - m'| = p``. The diagonal is ``m^2``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_CUTOFF = 100


class SpecError(ValueError):
    """Invalid potential terms or cutoff."""


@dataclass(frozen=True)
class GainLossTerm:
    n: int
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1 or self.n % 2 == 0:
            raise SpecError(f"gain-loss order must be a positive odd integer, got {self.n!r}")
        if not math.isfinite(self.beta):
            raise SpecError(f"gain-loss strength must be finite, got {self.beta!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def key(self):
        return f"v:{self.n}"


@dataclass(frozen=True)
class HermitianTerm:
    p: int
    lam: float

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2 or self.p % 2 == 1:
            raise SpecError(f"Hermitian order must be a positive even integer, got {self.p!r}")
        if not math.isfinite(self.lam):
            raise SpecError(f"Hermitian strength must be finite, got {self.lam!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def key(self):
        return f"u:{self.p}"


def parse_term_key(key: str) -> tuple[str, int]:
    """Split ``"v:3"`` / ``"u:2"`` into ``("v", 3)``; validates parity."""
    try:
        kind, order = key.strip().lower().split(":")
        order = int(order)
    except ValueError:
        raise SpecError(f"term must look like 'v:<odd n>' or 'u:<even p>', got {key!r}") from None
    if kind == "v":
        GainLossTerm(order, 0.0)
    elif kind == "u":
        HermitianTerm(order, 0.0)
    else:
        raise SpecError(f"unknown term kind {kind!r} in {key!r}")
    return kind, order


@dataclass(frozen=True)
class PotentialSpec:
    """Sum of gain-loss and Hermitian terms. Duplicate orders are merged."""

    gain_loss: tuple[GainLossTerm, ...] = ()
    hermitian: tuple[HermitianTerm, ...] = ()
    cutoff_M: int | None = None

    def __post_init__(self):
        gl: dict[int, float] = {}
        for t in self.gain_loss:
            gl[t.n] = gl.get(t.n, 0.0) + t.beta
        he: dict[int, float] = {}
        for t in self.hermitian:
            he[t.p] = he.get(t.p, 0.0) + t.lam
        object.__setattr__(self, "gain_loss", tuple(GainLossTerm(n, b) for n, b in sorted(gl.items())))
        object.__setattr__(self, "hermitian", tuple(HermitianTerm(p, l) for p, l in sorted(he.items())))
        if self.cutoff_M is not None:
            if int(self.cutoff_M) != self.cutoff_M or self.cutoff_M < 1:
                raise SpecError(f"cutoff_M must be a positive integer, got {self.cutoff_M!r}")
            object.__setattr__(self, "cutoff_M", int(self.cutoff_M))

    @classmethod
    def single(cls, n: int, beta: float, cutoff_M: int | None = None) -> "PotentialSpec":
        return cls(gain_loss=(GainLossTerm(n, beta),), cutoff_M=cutoff_M)

    @property
    def max_order(self) -> int:
        orders = [t.n for t in self.gain_loss] + [t.p for t in self.hermitian]
        return max(orders, default=0)

    def strengths(self) -> dict[str, float]:
        out = {t.key: t.beta for t in self.gain_loss}
        out.update({t.key: t.lam for t in self.hermitian})
        return out

    def strength(self, key: str) -> float:
        return self.strengths().get(f"{parse_term_key(key)[0]}:{parse_term_key(key)[1]}", 0.0)

    def with_strengths(self, values: dict[str, float]) -> "PotentialSpec":
        """Copy with the given terms' strengths replaced (terms are added if absent)."""
        gl = {t.n: t.beta for t in self.gain_loss}
        he = {t.p: t.lam for t in self.hermitian}
        for key, value in values.items():
            kind, order = parse_term_key(key)
            (gl if kind == "v" else he)[order] = float(value)
        return PotentialSpec(
            tuple(GainLossTerm(n, b) for n, b in gl.items()),
            tuple(HermitianTerm(p, l) for p, l in he.items()),
            self.cutoff_M,
        )

    def to_dict(self) -> dict:
        out = {
            "gain_loss": [{"n": t.n, "beta": t.beta} for t in self.gain_loss],
            "hermitian": [{"p": t.p, "lambda": t.lam} for t in self.hermitian],
        }
        if self.cutoff_M is not None:
            out["cutoff_M"] = self.cutoff_M
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialSpec":
        unknown = set(data) - {"gain_loss", "hermitian", "cutoff_M"}
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        try:
            gl = tuple(GainLossTerm(d["n"], d["beta"]) for d in data.get("gain_loss", []))
            he = tuple(HermitianTerm(d["p"], d["lambda"]) for d in data.get("hermitian", []))
        except (KeyError, TypeError) as exc:
            raise SpecError(f"malformed term in spec: {exc}") from None
        return cls(gl, he, data.get("cutoff_M"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        return cls.from_dict(json.loads(text))


@dataclass
class AngularOperator:
    cutoff_M: int
    entries: np.ndarray
    bandwidth: int
    spec: PotentialSpec = field(default_factory=PotentialSpec)

    @property
    def dimension(self) -> int:
        return 2 * self.cutoff_M + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.cutoff_M, self.cutoff_M + 1)

    def index(self, m: int) -> int:
        return m + self.cutoff_M

    def real_form(self) -> np.ndarray:
        """Real matrix similar to ``entries`` via ``D = diag(i^m)``.

        ``D A D^-1`` multiplies entry (m, m') by ``i^(m - m')``; odd bands carry
        ``-i beta/2`` and even bands real values, so the product is real. The
        spectrum is therefore exactly closed under conjugation.
        """
        return _real_form(self.entries, self.cutoff_M)

    def to_original_basis(self, w: np.ndarray) -> np.ndarray:
        """Map eigenvectors of ``real_form()`` back: ``v = D^-1 w``."""
        return np.conj(_phases(self.cutoff_M))[:, None] * w if w.ndim == 2 else np.conj(_phases(self.cutoff_M)) * w


def _phases(M: int) -> np.ndarray:
    # i^m for m in [-M, M], exact
    return np.array([1, 1j, -1, -1j])[np.arange(-M, M + 1) % 4]


def _real_form(a: np.ndarray, M: int) -> np.ndarray:
    m = np.arange(-M, M + 1)
    rot = np.array([1, 1j, -1, -1j])[(m[:, None] - m[None, :]) % 4]
    prod = rot * a
    return np.ascontiguousarray(prod.real)


def _check_cutoff(cutoff_M, max_order):
    if int(cutoff_M) != cutoff_M or cutoff_M < 1:
        raise SpecError(f"cutoff_M must be a positive integer, got {cutoff_M!r}")
    if 2 * cutoff_M < max_order:
        raise SpecError(
            f"cutoff_M={cutoff_M} too small for order {max_order}: need 2M >= order "
            "or the coupling band is truncated away"
        )


def build(spec: PotentialSpec, cutoff_M: int | None = None) -> AngularOperator:
    """Assemble the (2M+1) x (2M+1) complex symmetric matrix for ``spec``."""
    M = cutoff_M if cutoff_M is not None else (spec.cutoff_M or DEFAULT_CUTOFF)
    _check_cutoff(M, spec.max_order)
    M = int(M)
    dim = 2 * M + 1
    m = np.arange(-M, M + 1)
    a = np.zeros((dim, dim), dtype=np.complex128)
    a[np.arange(dim), np.arange(dim)] = m.astype(float) ** 2
    bands = [(t.n, -0.5j * t.beta) for t in spec.gain_loss] + [(t.p, -0.5 * t.lam + 0j) for t in spec.hermitian]
    for order, value in bands:
        if value == 0:
            continue
        i = np.arange(dim - order)
        a[i, i + order] += value
        a[i + order, i] += value
    return AngularOperator(M, a, spec.max_order, spec)


def reduced_block(n: int, size: int, beta: float = 0.0) -> np.ndarray:
    """Restriction of the gain-loss matrix to the levels that merge first.

    ``size=2``: basis ``m = (n-1)/2, m' = -(n+1)/2`` (one of the two
    equivalent sign choices), i.e. ``(n^2+1)/4 - (n/2) sigma_z - (i beta/2) sigma_x``.
    ``size=3``: ``n = 1`` only, basis ``m in {-1, 0, 1}``.
    """
    if int(n) != n or n < 1 or n % 2 == 0:
        raise SpecError(f"n must be a positive odd integer, got {n!r}")
    if size == 2:
        ms = [(n - 1) // 2, -(n + 1) // 2]
    elif size == 3:
        if n != 1:
            raise SpecError("the 3x3 restriction is defined for n = 1 only")
        ms = [-1, 0, 1]
    else:
        raise SpecError(f"size must be 2 or 3, got {size!r}")
    ms = np.array(ms)
    block = np.diag((ms ** 2).astype(complex))
    block[np.abs(ms[:, None] - ms[None, :]) == n] = -0.5j * beta
    return block


def reflection_sectors(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Real orthonormal bases of the even/odd sectors of ``real_form``.

    Every operator here commutes with ``m -> -m``. In the real form that
    reflection reads ``|m> -> (-1)^m |-m>``, so the sectors are spanned by
    ``|0>`` and ``(|m> +- (-1)^m |-m>) / sqrt 2`` for ``m = 1..M``.
    Columns index the sector basis; rows the full ``m`` basis.
    """
    dim = 2 * M + 1
    even = np.zeros((dim, M + 1))
    odd = np.zeros((dim, M))
    even[M, 0] = 1.0
    r = 1 / math.sqrt(2)
    for m in range(1, M + 1):
        sign = -1.0 if m % 2 else 1.0
        even[M + m, m] = r
        even[M - m, m] = sign * r
        odd[M + m, m - 1] = r
        odd[M - m, m - 1] = -sign * r
    return even, odd
