"""Deterministic numeric kernels: evaluation grids, Riemann sums with a
divergence policy, grid extremum search, root counting and order-statistic
quantiles.

Grids are knot-aligned: cell boundaries are forced at every supplied
breakpoint, then each span is subdivided uniformly until no cell exceeds
length/n.  This keeps quadrature cells from straddling segment joins and,
crucially, lets tightly graded knot layouts expose near-singular behaviour
to the divergence threshold, which a plain uniform grid never samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "DEFAULT_CELLS",
    "DIVERGENCE_THRESHOLD",
    "EvalValue",
    "EvaluationGrid",
    "count_roots",
    "empirical_quantile",
    "grid_extremum",
    "riemann",
]

FloatArray = NDArray[np.float64]

#: Default number of quadrature cells over a scope.
DEFAULT_CELLS = 2001

#: Any integrand sample beyond this magnitude (or non-finite) marks the
#: aggregate as divergent; infinities must be rankable first-class values.
DIVERGENCE_THRESHOLD = 1e12

#: Ties in grid extremum search within this absolute slack share the
#: extremum; the smallest x wins.
EXTREMUM_TIE_TOL = 1e-12


@dataclass(frozen=True)
class EvalValue:
    """Result of an aggregation on the extended real line.

    ``value`` is a float, possibly +inf or -inf; NaN encodes "undefined"
    (a divergent aggregate with no consistent sign).  ``n_nonfinite``
    counts the offending integrand samples (non-finite or beyond the
    divergence threshold).
    """

    value: float
    divergent: bool = False
    n_nonfinite: int = 0

    @property
    def undefined(self) -> bool:
        return math.isnan(self.value)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __abs__(self) -> "EvalValue":
        return EvalValue(abs(self.value), self.divergent, self.n_nonfinite)

    def to_json_value(self):
        if math.isnan(self.value):
            return "undefined"
        if self.value == math.inf:
            return "inf"
        if self.value == -math.inf:
            return "-inf"
        return self.value

    @staticmethod
    def from_json_value(v, divergent: bool = False, n_nonfinite: int = 0) -> "EvalValue":
        if v == "undefined":
            return EvalValue(math.nan, True, n_nonfinite)
        if v == "inf":
            return EvalValue(math.inf, True, n_nonfinite)
        if v == "-inf":
            return EvalValue(-math.inf, True, n_nonfinite)
        return EvalValue(float(v), divergent, n_nonfinite)


def weighted_sum(values, weights) -> EvalValue:
    """Sum of values * weights under the divergence policy.

    Offending samples (non-finite or |v| > DIVERGENCE_THRESHOLD) mark the
    result divergent: +inf when every sample is >= 0, -inf when every
    sample is <= 0, undefined for mixed signs or NaN samples.
    """
    vals = np.asarray(values, dtype=float)
    wts = np.asarray(weights, dtype=float)
    with np.errstate(invalid="ignore"):
        offending = ~np.isfinite(vals) | (np.abs(vals) > DIVERGENCE_THRESHOLD)
    if not np.any(offending):
        return EvalValue(float(np.sum(vals * wts)), False, 0)
    n_bad = int(np.count_nonzero(offending))
    if np.any(np.isnan(vals)):
        return EvalValue(math.nan, True, n_bad)
    with np.errstate(invalid="ignore"):
        if np.all(vals >= 0.0):
            return EvalValue(math.inf, True, n_bad)
        if np.all(vals <= 0.0):
            return EvalValue(-math.inf, True, n_bad)
    return EvalValue(math.nan, True, n_bad)


@dataclass(frozen=True, eq=False)
class EvaluationGrid:
    """Strictly increasing sample points with positive cell widths covering
    a scope interval (widths sum to its length)."""

    points: FloatArray
    cell_widths: FloatArray
    scope: tuple[float, float]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        wds = np.asarray(self.cell_widths, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "cell_widths", wds)
        lo, hi = float(self.scope[0]), float(self.scope[1])
        object.__setattr__(self, "scope", (lo, hi))
        length = hi - lo
        if not length > 0:
            raise ValueError("scope must have positive length")
        if pts.ndim != 1 or pts.size == 0 or pts.shape != wds.shape:
            raise ValueError("points and cell_widths must be matching 1-d arrays")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if np.any(wds <= 0):
            raise ValueError("cell widths must be positive")
        if abs(float(np.sum(wds)) - length) > 1e-9 * length:
            raise ValueError("cell widths must sum to the scope length")
        if pts[0] < lo - 1e-12 * length or pts[-1] > hi + 1e-12 * length:
            raise ValueError("grid points must lie within the scope")

    @staticmethod
    def _spans(lo: float, hi: float, breakpoints) -> list[tuple[float, float]]:
        length = hi - lo
        tol = 1e-13 * length
        inner = sorted({float(b) for b in breakpoints if lo + tol < float(b) < hi - tol})
        bounds = [lo]
        for b in inner:
            if b - bounds[-1] > tol:
                bounds.append(b)
        bounds.append(hi)
        return list(zip(bounds[:-1], bounds[1:]))

    @classmethod
    def midpoint(cls, scope, n: int = DEFAULT_CELLS, breakpoints=()) -> "EvaluationGrid":
        """Midpoint-rule cells: breakpoints become cell boundaries, spans are
        subdivided until no cell exceeds length/n."""
        lo, hi = float(scope[0]), float(scope[1])
        if not hi > lo:
            raise ValueError("scope must have positive length")
        if n < 1:
            raise ValueError("cell count must be positive")
        target = (hi - lo) / n
        pts, wds = [], []
        for left, right in cls._spans(lo, hi, breakpoints):
            k = max(1, math.ceil((right - left) / target - 1e-9))
            edges = np.linspace(left, right, k + 1)
            pts.append(0.5 * (edges[:-1] + edges[1:]))
            wds.append(np.diff(edges))
        return cls(np.concatenate(pts), np.concatenate(wds), (lo, hi))

    @classmethod
    def nodes(cls, scope, n: int = DEFAULT_CELLS, breakpoints=()) -> "EvaluationGrid":
        """Endpoint-inclusive node grid (for extremum and root scans): scope
        ends and breakpoints are nodes, spans filled uniformly.  Widths are
        the half-gap cells around each node."""
        lo, hi = float(scope[0]), float(scope[1])
        if not hi > lo:
            raise ValueError("scope must have positive length")
        if n < 1:
            raise ValueError("node count must be positive")
        target = (hi - lo) / n
        nodes = [lo]
        for left, right in cls._spans(lo, hi, breakpoints):
            k = max(1, math.ceil((right - left) / target - 1e-9))
            nodes.extend(np.linspace(left, right, k + 1)[1:].tolist())
        pts = np.asarray(nodes)
        gaps = np.diff(pts)
        wds = np.empty_like(pts)
        wds[0] = gaps[0] / 2
        wds[-1] = gaps[-1] / 2
        wds[1:-1] = (pts[2:] - pts[:-2]) / 2
        return cls(pts, wds, (lo, hi))


def riemann(values, grid: EvaluationGrid) -> EvalValue:
    """Riemann sum of integrand samples over the grid cells."""
    vals = np.asarray(values, dtype=float)
    if vals.shape != grid.points.shape:
        raise ValueError("values must align with the grid points")
    return weighted_sum(vals, grid.cell_widths)


def grid_extremum(values, grid: EvaluationGrid, mode: str = "max") -> tuple[float, float]:
    """Extremum value and its location over the grid points.

    Ties within EXTREMUM_TIE_TOL resolve to the smallest x.  All values
    must be finite; the caller turns non-finite samples into a divergent
    aggregate before calling.
    """
    vals = np.asarray(values, dtype=float)
    if vals.shape != grid.points.shape:
        raise ValueError("values must align with the grid points")
    if not np.all(np.isfinite(vals)):
        raise ValueError("grid_extremum requires finite values")
    if mode == "max":
        target = float(np.max(vals))
    elif mode == "min":
        target = float(np.min(vals))
    else:
        raise ValueError("mode must be 'max' or 'min'")
    idx = int(np.nonzero(np.abs(vals - target) <= EXTREMUM_TIE_TOL)[0][0])
    return target, float(grid.points[idx])


def count_roots(values, zero_band: float | None = None) -> int:
    """Number of roots along consecutive samples.

    Counts (i) strict sign changes between neighbours that both sit outside
    the zero band and (ii) maximal runs of in-band samples, each run once,
    so tangential touches register a single root.  The default band is
    1e-9 times the spread of |values|.
    """
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        return 0
    if not np.all(np.isfinite(vals)):
        raise ValueError("count_roots requires finite values")
    mags = np.abs(vals)
    band = float(zero_band) if zero_band is not None else 1e-9 * float(mags.max() - mags.min())
    inband = mags <= band
    runs = int(np.count_nonzero(inband[1:] & ~inband[:-1])) + int(inband[0])
    out = ~inband
    crossings = int(np.count_nonzero(out[:-1] & out[1:] & (vals[:-1] * vals[1:] < 0)))
    return runs + crossings


def empirical_quantile(values, q: float) -> float:
    """Order-statistic quantile with linear interpolation between ranks."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValueError("empirical_quantile needs at least one value")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return float(np.quantile(vals, q))
