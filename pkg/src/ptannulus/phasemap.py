"""Phase diagrams: ``max |Im alpha^2|`` over a grid of two potential strengths.

Rows of the grid are independent work items handed to a thread pool; the
compiled kernels release the GIL, so threads scale on multi-core machines.
Each cell is computed the same way whatever the worker count, which makes
maps bit-identical across runs.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import io
from .eigen import EigenConvergenceError, sector_eigvals
from .operator import PotentialSpec, SpecError, build, parse_term_key
from .threshold import NoThresholdError, find_threshold

log = logging.getLogger(__name__)

EPSILON = 1e-6
DEFAULT_CUTOFF = 60
DEFAULT_COUNT = 101
NORMALIZATION_CUTOFF = 100


@dataclass(frozen=True)
class Axis:
    """A strength axis. With ``normalized`` the range is in units of the term's own threshold."""

    term: str
    lo: float
    hi: float
    count: int = DEFAULT_COUNT
    normalized: bool = False

    def __post_init__(self):
        kind, order = parse_term_key(self.term)
        object.__setattr__(self, "term", f"{kind}:{order}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"axis {self.term}: range must be finite")
        if not self.hi > self.lo:
            raise ValueError(f"axis {self.term}: empty range [{self.lo}, {self.hi}]")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis {self.term}: count must be an integer >= 2")
        if self.normalized and kind != "v":
            raise ValueError(f"axis {self.term}: only gain-loss axes can be normalized to a threshold")

    def coords(self) -> np.ndarray:
        x = np.linspace(self.lo, self.hi, int(self.count))
        if self.lo == -self.hi:
            # exact mirror pairs and an exact zero for odd counts
            x = 0.5 * (x - x[::-1])
        return x

    def to_dict(self):
        return {"term": self.term, "lo": self.lo, "hi": self.hi, "count": int(self.count),
                "normalized": self.normalized}


@dataclass
class PhaseMap:
    axis1: Axis
    axis2: Axis
    coords1: np.ndarray
    coords2: np.ndarray
    values: np.ndarray  # values[i, j] at (coords1[i], coords2[j])
    cutoff_M: int
    base_spec: PotentialSpec = field(default_factory=PotentialSpec)
    normalization: dict = field(default_factory=dict)  # term -> threshold used as unit
    epsilon: float = EPSILON
    failures: list = field(default_factory=list)

    def scale(self, axis: int) -> float:
        ax = self.axis1 if axis == 1 else self.axis2
        return self.normalization.get(ax.term, 1.0) if ax.normalized else 1.0

    def strengths(self, axis: int) -> np.ndarray:
        return (self.coords1 if axis == 1 else self.coords2) * self.scale(axis)

    def spec_at(self, c1: float, c2: float) -> PotentialSpec:
        return self.base_spec.with_strengths({
            self.axis1.term: c1 * self.scale(1), self.axis2.term: c2 * self.scale(2)})

    def max_imag_at(self, c1: float, c2: float) -> float:
        return _cell(self.spec_at(c1, c2), self.cutoff_M)

    def symmetric_mask(self) -> np.ndarray:
        return self.values <= self.epsilon

    def header(self) -> dict:
        return {
            "axis1": self.axis1.to_dict(), "axis2": self.axis2.to_dict(),
            "cutoff_M": self.cutoff_M, "epsilon": self.epsilon,
            "normalization": dict(sorted(self.normalization.items())),
            "base_spec": self.base_spec.to_dict(),
            "failures": [list(f) for f in self.failures],
            "columns": ["s1", "s2", "max_imag"],
        }

    def rows(self):
        for i, c1 in enumerate(self.coords1):
            for j, c2 in enumerate(self.coords2):
                yield (float(c1), float(c2), float(self.values[i, j]))

    def write(self, prefix, gnuplot: bool = True):
        """``<prefix>.csv`` (long format), ``<prefix>.json`` header, optional ``<prefix>.matrix``."""
        io.write_csv(f"{prefix}.csv", ["s1", "s2", "max_imag"], self.rows())
        io.write_json(f"{prefix}.json", self.header())
        if gnuplot:
            write_gnuplot_matrix(f"{prefix}.matrix", self)


def write_gnuplot_matrix(path, pmap: PhaseMap):
    """gnuplot ``nonuniform matrix`` text: first row ``N x_1..x_N``, then ``y_j v_1j..v_Nj``."""
    lines = [" ".join([str(len(pmap.coords1))] + [repr(float(x)) for x in pmap.coords1])]
    for j, y in enumerate(pmap.coords2):
        lines.append(" ".join([repr(float(y))] + [repr(float(v)) for v in pmap.values[:, j]]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _cell(spec: PotentialSpec, cutoff_M: int) -> float:
    return max(float(np.max(np.abs(v.imag))) for v in sector_eigvals(build(spec, cutoff_M)))


def normalization_thresholds(terms, cutoff_M: int = NORMALIZATION_CUTOFF, workers: int = 1) -> dict:
    """Single-term thresholds used as axis units (computed once per term)."""
    out = {}
    for term in terms:
        out[term] = find_threshold(PotentialSpec(), term, cutoff_M, workers=workers, trace_levels=False).beta_c
    return out


def scan(base_spec: PotentialSpec, axis1: Axis, axis2: Axis, cutoff_M: int = DEFAULT_CUTOFF,
         workers: int = 1, epsilon: float = EPSILON, normalization: dict | None = None,
         normalization_cutoff: int = NORMALIZATION_CUTOFF) -> PhaseMap:
    """Fill the grid. Failed cells become NaN and are listed in ``failures``."""
    if axis1.term == axis2.term:
        raise ValueError("the two axes must address different terms")
    build(base_spec.with_strengths({axis1.term: 1.0, axis2.term: 1.0}), cutoff_M)  # validate cutoff early
    wanted = [ax.term for ax in (axis1, axis2) if ax.normalized]
    norm = dict(normalization or {})
    missing = [t for t in wanted if t not in norm]
    if missing:
        norm.update(normalization_thresholds(missing, normalization_cutoff, workers))
    pm = PhaseMap(axis1, axis2, axis1.coords(), axis2.coords(),
                  np.zeros((axis1.count, axis2.count)), cutoff_M, base_spec,
                  {t: norm[t] for t in wanted}, epsilon)

    def row(i):
        out = np.empty(len(pm.coords2))
        fails = []
        for j, c2 in enumerate(pm.coords2):
            try:
                out[j] = pm.max_imag_at(pm.coords1[i], c2)
            except EigenConvergenceError as exc:
                out[j] = np.nan
                fails.append((i, j, str(exc)))
        return out, fails

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(row, range(len(pm.coords1))))
    else:
        results = [row(i) for i in range(len(pm.coords1))]
    for i, (vals, fails) in enumerate(results):
        pm.values[i] = vals
        pm.failures.extend(fails)
    for f in pm.failures:
        log.warning("cell (%d, %d) failed: %s", *f)
    return pm


# --- symmetry ----------------------------------------------------------------

KINDS = ("point_reflection", "axis1_sign_flip", "axis2_sign_flip")


@dataclass
class SymmetryReport:
    kind: str
    measure: str
    asymmetry: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.asymmetry <= self.tol)


def _require_centered(coords, name):
    if not np.array_equal(coords, -coords[::-1]):
        raise ValueError(f"{name} grid is not symmetric about zero")


def symmetry_check(pm: PhaseMap, kind: str, tol: float = 1e-6, measure: str = "values",
                   refine: bool = True) -> SymmetryReport:
    """Largest mismatch between the map and its mirror image.

    ``measure="values"`` compares cell values (absolute, in ``alpha^2`` units).
    ``measure="threshold"`` compares the boundary of the symmetric phase
    instead: the first crossing along axis 2 for each axis-1 value, relative
    to the crossing at axis-1 value zero. Only ``axis1_sign_flip`` is defined
    for it.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind in ("point_reflection", "axis1_sign_flip"):
        _require_centered(pm.coords1, "axis1")
    if kind in ("point_reflection", "axis2_sign_flip"):
        _require_centered(pm.coords2, "axis2")
    if measure == "values":
        v = pm.values
        mirror = {"point_reflection": v[::-1, ::-1], "axis1_sign_flip": v[::-1, :], "axis2_sign_flip": v[:, ::-1]}[kind]
        diff = np.abs(v - mirror)
        asym = float(np.nanmax(diff)) if np.isfinite(diff).any() else math.inf
        return SymmetryReport(kind, measure, asym, tol)
    if measure != "threshold":
        raise ValueError("measure must be 'values' or 'threshold'")
    if kind != "axis1_sign_flip":
        raise ValueError("the threshold measure is defined for axis1_sign_flip only")
    curve = threshold_curve(pm, axis=1, refine=refine)
    upper = np.array([p.upper for p in curve])
    ref = upper[len(upper) // 2]
    if not (math.isfinite(ref) and ref > 0):
        raise ValueError("no finite threshold at axis-1 value zero to normalise by")
    diffs = []
    for a, b in zip(upper, upper[::-1]):
        if math.isinf(a) and math.isinf(b):
            diffs.append(0.0)
        else:
            diffs.append(abs(a - b) / ref)
    return SymmetryReport(kind, measure, float(max(diffs)), tol)


# --- threshold curves --------------------------------------------------------

@dataclass
class CurvePoint:
    fixed: float  # coordinate on the fixed axis
    upper: float  # first crossing towards positive strength (+inf if none in range)
    lower: float  # first crossing towards negative strength (-inf if none in range)


def _bisect(fn, lo, hi, tol):
    """``fn(lo)`` symmetric, ``fn(hi)`` broken; shrink until ``|hi - lo| <= tol``."""
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _first_crossing(coords, broken, start, step, refine_fn=None, tol=None):
    """Walk from index ``start`` in direction ``step``; return crossing coordinate or inf."""
    if broken[start]:
        return 0.0 if coords[start] == 0 else float(coords[start])
    i = start
    while 0 <= i + step < len(coords):
        if broken[i + step]:
            if refine_fn is None:
                return 0.5 * (coords[i] + coords[i + step])
            return _bisect(refine_fn, float(coords[i]), float(coords[i + step]), tol)
        i += step
    return math.inf if step > 0 else -math.inf


def threshold_curve(pm: PhaseMap, axis: int = 1, refine: bool = False, resolution: float = 1e-4):
    """For every value on the fixed ``axis``, the first crossings along the other axis.

    Crossings are located between the bracketing cells: at the midpoint of
    the two cells, or with ``refine=True`` by bisection on the exact
    classification down to ``resolution`` (in axis coordinates).
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    fixed = pm.coords1 if axis == 1 else pm.coords2
    swept = pm.coords2 if axis == 1 else pm.coords1
    vals = pm.values if axis == 1 else pm.values.T
    zero = int(np.argmin(np.abs(swept)))
    up_start = zero if swept[zero] >= 0 else zero + 1
    dn_start = zero if swept[zero] <= 0 else zero - 1
    out = []
    for i, f in enumerate(fixed):
        broken = ~(vals[i] <= pm.epsilon)
        fn = None
        if refine:
            if axis == 1:
                fn = lambda x, f=f: pm.max_imag_at(f, x) > pm.epsilon  # noqa: E731
            else:
                fn = lambda x, f=f: pm.max_imag_at(x, f) > pm.epsilon  # noqa: E731
        up = _first_crossing(swept, broken, up_start, +1, fn, resolution) if up_start < len(swept) else math.inf
        dn = _first_crossing(swept, broken, dn_start, -1, fn, resolution) if dn_start >= 0 else -math.inf
        out.append(CurvePoint(float(f), up, dn))
    return out


def window_at(pm: PhaseMap, fixed: float, axis: int = 1, resolution: float = 1e-4) -> float:
    """First crossing towards positive strength on the swept axis at an arbitrary fixed coordinate.

    Uses a forward scan plus bisection on the exact classification (not the
    grid), so it also works between rows. Returns ``inf`` if the phase stays
    symmetric up to the end of the map's range.
    """
    swept_axis = pm.axis2 if axis == 1 else pm.axis1
    fixed_axis = pm.axis1 if axis == 1 else pm.axis2
    base = pm.base_spec.with_strengths({fixed_axis.term: fixed * pm.scale(axis)})
    scale = pm.scale(2 if axis == 1 else 1)
    try:
        res = find_threshold(base, swept_axis.term, pm.cutoff_M, resolution=resolution * scale,
                             epsilon=pm.epsilon, ceiling=swept_axis.hi * scale, trace_levels=False)
    except NoThresholdError:
        return math.inf
    except ValueError:
        return 0.0  # already broken at zero swept strength
    return res.beta_c / scale


@dataclass
class CurveMaximum:
    fixed: float
    window: float  # clamped to the end of the swept range when ``open``
    row_fixed: float
    row_window: float
    open: bool = False


def curve_maximum(pm: PhaseMap, axis: int = 1, resolution: float = 1e-4, xtol: float = 1e-3) -> CurveMaximum:
    """Largest first-crossing window (towards positive strength) over the fixed axis.

    The best grid row (refined crossing) seeds a golden-section search over
    the fixed coordinate between its two neighbouring rows. A window that
    reaches the end of the swept range is clamped there and flagged ``open``.
    """
    fixed = pm.coords1 if axis == 1 else pm.coords2
    edge = (pm.axis2 if axis == 1 else pm.axis1).hi
    curve = threshold_curve(pm, axis, refine=True, resolution=resolution)
    ups = np.minimum(np.array([p.upper for p in curve]), edge)
    best = int(np.argmax(ups))
    a = float(fixed[max(best - 1, 0)])
    b = float(fixed[min(best + 1, len(fixed) - 1)])
    f = lambda x: min(window_at(pm, x, axis, resolution), edge)  # noqa: E731
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    x, w = (c, fc) if fc >= fd else (d, fd)
    if ups[best] > w:
        x, w = float(fixed[best]), float(ups[best])
    return CurveMaximum(x, w, float(fixed[best]), float(ups[best]), bool(w >= edge))


def lambda_symmetric(n: int, p: int) -> bool:
    """Expected symmetry of a (``u:p``, ``v:n``) diagram under ``lam -> -lam``: n not a multiple of p/2."""
    if p % 2:
        raise SpecError("p must be even")
    return n % (p // 2) != 0
