"""PT-breaking thresholds along a ray in strength space, and eigenvalue flows.

The threshold is the smallest strength ``s`` at which ``max |Im alpha^2|``
rises above a detection floor ``epsilon``. A coarse forward scan finds the
first bracket, bisection refines it, and a short continuity trace from
``s = 0`` identifies which unperturbed levels merged.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .eigen import sector_eigvals
from .operator import PotentialSpec, SpecError, build, parse_term_key, reduced_block, reflection_sectors

EPSILON = 1e-8
RESOLUTION = 1e-4
STRIDE_FRACTION = 0.05


class NoThresholdError(RuntimeError):
    """max |Im| never exceeded epsilon up to the scan ceiling."""

    def __init__(self, ceiling):
        super().__init__(f"PT-symmetric up to ceiling s={ceiling!r}")
        self.ceiling = ceiling


@dataclass
class ThresholdResult:
    beta_c: float
    bracket: tuple[float, float]
    method: str
    participating_levels: tuple[float, ...] = ()
    merge_value: complex | None = None
    cutoff_M: int | None = None
    status: str = "ok"
    direction: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        d["participating_levels"] = list(self.participating_levels)
        if self.merge_value is not None:
            d["merge_value"] = [self.merge_value.real, self.merge_value.imag]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _odd_order(n):
    if isinstance(n, bool) or int(n) != n or n < 1 or n % 2 == 0:
        raise SpecError(f"n must be a positive odd integer, got {n!r}")
    return int(n)


def _degeneracy_strength(block0, coupling):
    """Strength where a 2x2 ``block0 + s*coupling`` (zero-diagonal coupling) degenerates.

    Eigenvalues are ``(a+d)/2 +- sqrt(((a-d)/2)^2 + s^2 c^2)`` with ``c^2 < 0``
    for imaginary coupling, so the discriminant vanishes at ``|a-d| / (2|c|)``.
    """
    a, d = block0[0, 0].real, block0[1, 1].real
    c = coupling[0, 1]
    return abs(a - d) / (2 * abs(c))


def analytic_2x2(n: int) -> float:
    """Degeneracy point of the two-level restriction: exactly ``n``."""
    n = _odd_order(n)
    b0 = reduced_block(n, 2, 0.0)
    coupling = reduced_block(n, 2, 1.0) - b0
    return float(_degeneracy_strength(b0, coupling))


def analytic_3x3(n: int = 1) -> float:
    """Degeneracy point of the ``m in {-1,0,1}`` restriction for ``n = 1``.

    The odd combination ``|1> - |-1>`` decouples; the remaining pair
    ``|0>, (|1> + |-1>)/sqrt 2`` has coupling ``-i beta/sqrt 2`` and gap 1.
    """
    if n != 1:
        raise SpecError("the 3x3 estimate exists for n = 1 only")
    b0 = reduced_block(1, 3, 0.0)
    coupling = reduced_block(1, 3, 1.0) - b0
    even = np.array([[0.0, 1 / math.sqrt(2)], [1.0, 0.0], [0.0, 1 / math.sqrt(2)]])
    return float(_degeneracy_strength(even.T @ b0 @ even, even.T @ coupling @ even))


def _normalize_direction(direction) -> dict[str, float]:
    if isinstance(direction, str):
        direction = {direction: 1.0}
    out = {}
    for key, coef in dict(direction).items():
        kind, order = parse_term_key(key)
        out[f"{kind}:{order}"] = float(coef)
    if not out or not any(out.values()):
        raise SpecError("direction must name at least one term with nonzero weight")
    return out


class Family:
    """One-parameter family ``base + s * direction`` with frozen other strengths."""

    def __init__(self, base: PotentialSpec, direction, cutoff_M: int):
        self.base = base
        self.direction = _normalize_direction(direction)
        self.cutoff_M = cutoff_M
        self.at(1.0)  # validates cutoff against orders

    def spec(self, s: float) -> PotentialSpec:
        return self.base.with_strengths({k: c * s for k, c in self.direction.items()})

    def at(self, s: float):
        return build(self.spec(s), self.cutoff_M)

    def sector_spectra(self, s: float) -> list[np.ndarray]:
        return sector_eigvals(self.at(s))

    def spectrum(self, s: float) -> np.ndarray:
        vals = np.concatenate(self.sector_spectra(s))
        return vals[np.lexsort((vals.imag, vals.real))]

    def max_imag(self, s: float) -> float:
        return max(float(np.max(np.abs(v.imag))) for v in self.sector_spectra(s))

    def default_stride_and_ceiling(self, ceiling=None):
        orders = [parse_term_key(k)[1] for k in self.direction]
        keys = list(self.direction)
        single_v = len(keys) == 1 and keys[0].startswith("v:")
        scale = max(orders) / max(abs(c) for c in self.direction.values())
        if ceiling is None:
            ceiling = 4.0 * scale
        if single_v:
            stride = STRIDE_FRACTION * analytic_2x2(orders[0]) / abs(self.direction[keys[0]])
        else:
            stride = STRIDE_FRACTION * ceiling
        return stride, float(ceiling)


def _map(fn, xs, workers):
    if workers and workers > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, xs))
    return [fn(x) for x in xs]


def find_threshold(base_spec: PotentialSpec, direction, cutoff_M: int = 100, resolution: float = RESOLUTION,
                   epsilon: float = EPSILON, ceiling: float | None = None, workers: int = 1,
                   trace_levels: bool = True) -> ThresholdResult:
    """First PT-breaking strength along ``base_spec + s * direction``, ``s >= 0``.

    ``direction`` is a term key such as ``"v:1"`` or a mapping of keys to
    weights (``{"v:1": -1}`` scans the negative ray).
    """
    if not resolution > 0 or not epsilon > 0:
        raise ValueError("resolution and epsilon must be positive")
    fam = Family(base_spec, direction, cutoff_M)
    stride, ceiling = fam.default_stride_and_ceiling(ceiling)
    if fam.max_imag(0.0) > epsilon:
        raise ValueError("family is already PT-broken at s = 0")

    count = int(math.ceil(ceiling / stride - 1e-12))
    grid = [min(k * stride, ceiling) for k in range(1, count + 1)]
    batch = max(1, workers or 1)
    lo = hi = None
    prev = 0.0
    for start in range(0, len(grid), batch):
        chunk = grid[start:start + batch]
        values = _map(fam.max_imag, chunk, workers)
        for s, v in zip(chunk, values):
            if v > epsilon:
                lo, hi = prev, s
                break
            prev = s
        if hi is not None:
            break
    if hi is None:
        raise NoThresholdError(ceiling)

    coarse = (lo, hi)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if fam.max_imag(mid) > epsilon:
            hi = mid
        else:
            lo = mid

    status = "ok"
    # one-sidedness inside the coarse bracket: nothing below lo may be broken
    probes = [coarse[0] + (lo - coarse[0]) * f for f in (0.25, 0.5, 0.75)]
    if lo > coarse[0] and any(v > epsilon for v in _map(fam.max_imag, probes, workers)):
        status = "non_monotone"
        lo, hi = coarse

    origins, merge_value = (), None
    if trace_levels and status == "ok":
        origins, merge_value = _merging_pair(fam, hi, stride, epsilon)
    return ThresholdResult(
        beta_c=0.5 * (lo + hi), bracket=(lo, hi), method="scan_bisect",
        participating_levels=origins, merge_value=merge_value, cutoff_M=cutoff_M,
        status=status, direction=fam.direction,
    )


def _pair_at(vals, epsilon):
    """Closest pair with opposite-sign imaginary parts above epsilon, or None."""
    up = [i for i, z in enumerate(vals) if z.imag > epsilon]
    dn = [i for i, z in enumerate(vals) if z.imag < -epsilon]
    best = None
    for i in up:
        for j in dn:
            d = abs(vals[i] - vals[j])
            if best is None or d < best[0]:
                best = (d, i, j)
    return best


def _merging_pair(fam: Family, s_hi: float, stride: float, epsilon: float):
    """Unperturbed origins of the pair that has just turned complex at ``s_hi``.

    The search and the trace stay inside one reflection sector: copies of a
    level in the two sectors are exactly degenerate and would make a
    cross-sector continuity match ambiguous.
    """
    sectors = fam.sector_spectra(s_hi)
    found = [(p, sec) for sec, vals in enumerate(sectors) if (p := _pair_at(vals, epsilon)) is not None]
    (_, i, j), sec = min(found, key=lambda f: (f[0][0], f[1]))
    vals = sectors[sec]
    k = max(i, j) + 2
    steps = max(40, int(math.ceil(4 * s_hi / stride)) + 1)
    grid = np.linspace(0.0, s_hi, steps)
    levels, _ = _trace_sector([fam.sector_spectra(x)[sec] for x in grid], k)
    final = levels[-1]
    picked = []
    for target in (vals[i], vals[j]):
        dist = np.abs(final - target)
        dist[picked] = np.inf
        picked.append(int(np.argmin(dist)))
    origins = tuple(sorted(float(levels[0][p].real) for p in picked))
    return origins, complex(0.5 * (vals[i] + vals[j]))


@dataclass
class Merge:
    sector: int  # 0 = even, 1 = odd reflection sector
    levels: tuple[int, int]  # indices within that sector's trace
    origins: tuple[float, float]  # real values at s = 0
    beta: float  # midpoint of the grid interval where the pair turns complex
    value: complex


@dataclass
class FlowTrace:
    beta_grid: np.ndarray
    levels: np.ndarray  # shape (len(beta_grid), k), continuity matched
    ambiguous: list = field(default_factory=list)  # grid indices with an unclear assignment
    sectors: list = field(default_factory=list)  # (sector, index in sector trace) per level
    sector_levels: list = field(default_factory=list)  # full per-sector traces
    epsilon: float = EPSILON

    @property
    def k(self):
        return self.levels.shape[1]

    def merges(self) -> list[Merge]:
        """Pairs that turn into a complex-conjugate pair, ordered by strength.

        A merge is reported when at least one partner is among the ``k``
        listed levels; its partner may be a level of the same sector that
        was not listed (for example one copy of a degenerate pair).
        """
        shown = set(self.sectors)
        eps = self.epsilon
        out = []
        for sec, lv in enumerate(self.sector_levels):
            done = set()
            for t in range(1, len(self.beta_grid)):
                for a in range(lv.shape[1]):
                    for b in range(a + 1, lv.shape[1]):
                        if (a, b) in done or not ({(sec, a), (sec, b)} & shown):
                            continue
                        was_real = abs(lv[t - 1, a].imag) <= eps and abs(lv[t - 1, b].imag) <= eps
                        za, zb = lv[t, a], lv[t, b]
                        conj = (abs(za.imag) > eps and za.imag * zb.imag < 0
                                and abs(za - np.conj(zb)) <= 1e-6 * max(1.0, abs(za)))
                        if was_real and conj:
                            done.add((a, b))
                            out.append(Merge(
                                sec, (a, b), (float(lv[0, a].real), float(lv[0, b].real)),
                                float(0.5 * (self.beta_grid[t - 1] + self.beta_grid[t])),
                                complex(za.real, abs(za.imag)),
                            ))
        out.sort(key=lambda m: (m.beta, m.origins, m.sector))
        return out

    def rows(self):
        return [(float(b), i, float(z.real), float(z.imag))
                for b, row in zip(self.beta_grid, self.levels) for i, z in enumerate(row)]


def _trace_sector(spectra, k: int, margin: int = 4):
    """Follow the ``k`` lowest levels of one sector across consecutive spectra.

    Each step predicts the next values by linear extrapolation and solves
    the assignment problem on complex distance. A step is ambiguous when
    some level's runner-up candidate is less than twice as far as its match.
    """
    k = min(k, len(spectra[0]))
    levels = np.empty((len(spectra), k), dtype=complex)
    levels[0] = spectra[0][:k]
    ambiguous = []
    for t in range(1, len(spectra)):
        cand = spectra[t][:k + margin]
        pred = levels[t - 1] if t == 1 else 2 * levels[t - 1] - levels[t - 2]
        cost = np.abs(pred[:, None] - cand[None, :])
        rows, cols = linear_sum_assignment(cost)
        levels[t, rows] = cand[cols]
        chosen = cost[rows, cols]
        runner = np.sort(cost, axis=1)
        runner = np.where(runner[:, 0] < chosen, runner[:, 0], runner[:, 1])
        if np.any(runner < 2 * chosen):
            ambiguous.append(t)
    return levels, ambiguous


def _trace(fam: Family, grid, k: int, workers: int = 1) -> FlowTrace:
    spectra = _map(fam.sector_spectra, list(grid), workers)
    # one spare level per sector so that partners of listed levels are followed too
    per_sector = [_trace_sector([sp[sec] for sp in spectra], k + 1) for sec in range(len(spectra[0]))]
    # pick the k lowest levels at s = 0 across sectors (even sector first on ties)
    keys = sorted((lv[0, i].real, sec, i) for sec, (lv, _) in enumerate(per_sector) for i in range(lv.shape[1]))[:k]
    levels = np.stack([per_sector[sec][0][:, i] for _, sec, i in keys], axis=1)
    ambiguous = sorted({t for _, amb in per_sector for t in amb})
    return FlowTrace(np.asarray(grid, dtype=float), levels, ambiguous,
                     sectors=[(sec, i) for _, sec, i in keys], sector_levels=[lv for lv, _ in per_sector])


def flow(base_spec: PotentialSpec, direction, beta_max: float, steps: int, k_levels: int,
         cutoff_M: int = 100, workers: int = 1, epsilon: float = EPSILON) -> FlowTrace:
    """The ``k_levels`` lowest levels followed continuously from ``s = 0`` to ``beta_max``."""
    if steps < 2 or k_levels < 2:
        raise ValueError("steps and k_levels must both be >= 2")
    if not beta_max > 0:
        raise ValueError("beta_max must be positive")
    fam = Family(base_spec, direction, cutoff_M)
    tr = _trace(fam, np.linspace(0.0, beta_max, steps), k_levels, workers=workers)
    tr.epsilon = epsilon
    return tr


def delta_n(n_list, cutoff_M: int = 100, workers: int = 1, **kw) -> list[tuple[int, float]]:
    """``(n, |beta_nc - n|)`` for each odd ``n``."""
    out = []
    for n in n_list:
        n = _odd_order(n)
        res = find_threshold(PotentialSpec(), f"v:{n}", cutoff_M, workers=workers, trace_levels=False, **kw)
        out.append((n, abs(res.beta_c - analytic_2x2(n))))
    return out


def decay_slope(deltas) -> float:
    """Least-squares slope of ``log Delta_n`` against ``n``."""
    ns = np.array([d[0] for d in deltas], dtype=float)
    logs = np.log([d[1] for d in deltas])
    return float(np.polyfit(ns, logs, 1)[0])


def sector_of(M: int, vector) -> str:
    """'even' or 'odd' reflection sector of a real-form vector (diagnostic)."""
    even, odd = reflection_sectors(M)
    v = np.asarray(vector)
    return "even" if np.linalg.norm(even.T @ v) >= np.linalg.norm(odd.T @ v) else "odd"
