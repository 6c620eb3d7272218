"""The measure lattice: specifications built from orthogonal aspects and the
evaluation pipeline that turns (spec, truth, estimate, distribution) into a
single extended-real value.

Aspects
-------
localization:
    "range" (aggregate over an interval) or "point" (single location x*).
characteristic:
    which feature of the curves is compared: "function", "first_derivative"
    or "second_derivative".
loss:
    pointwise comparison: signed "difference", "absolute", "squared" or the
    "eps_accuracy" indicator 1{|deviation| <= epsilon}.
axis (range only):
    "Y" aggregates the loss values; "X" compares structural locations
    (roots, argmax, argmin) on the x axis.
aggregation (range only):
    Y axis: "integral_dx", "expectation_dFx", "quantile_Fx",
    "precision_weighted", "max", "min".
    X axis: "num_roots", "argmax_location", "argmin_location".
scope:
    "full" domain, a "quantile_band" (l, u) of the predictor distribution,
    or an explicit "interval" intersected with the domain.

The ranking direction depends only on the loss: signed differences rank by
magnitude, absolute and squared losses rank upward, accuracy ranks downward.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .curves import BivariateCurve, Curve
from .distributions import PredictorDistribution, truncated_prob_grid
from .errors import DegenerateScopeError, DomainError, SpecValidationError
from .kernels import (
    DEFAULT_CELLS,
    DIVERGENCE_THRESHOLD,
    EvalValue,
    EvaluationGrid,
    count_roots,
    empirical_quantile,
    grid_extremum,
    riemann,
    weighted_sum,
)

__all__ = [
    "AXES",
    "CHARACTERISTICS",
    "LOCALIZATIONS",
    "LOSSES",
    "MeasureSpec",
    "Scope",
    "X_AGGREGATIONS",
    "Y_AGGREGATIONS",
    "characteristic_curve",
    "default_epsilon",
    "evaluate",
    "evaluate_bivariable",
    "measure_direction",
    "resolve_scope",
    "validate",
]

LOCALIZATIONS = ("range", "point")
CHARACTERISTICS = ("function", "first_derivative", "second_derivative")
LOSSES = ("difference", "absolute", "squared", "eps_accuracy")
AXES = ("Y", "X")
Y_AGGREGATIONS = ("integral_dx", "expectation_dFx", "quantile_Fx", "precision_weighted", "max", "min")
X_AGGREGATIONS = ("num_roots", "argmax_location", "argmin_location")
SCOPE_KINDS = ("full", "quantile_band", "interval")

#: Fraction of the reference extent used when epsilon is left unset.
DEFAULT_EPSILON_FRACTION = 0.05


@dataclass(frozen=True)
class Scope:
    """Where a range measure looks: the full domain, a quantile band of the
    predictor distribution, or an explicit interval."""

    kind: str = "full"
    l: float | None = None
    u: float | None = None
    lo: float | None = None
    hi: float | None = None

    @staticmethod
    def full() -> "Scope":
        return Scope("full")

    @staticmethod
    def quantile_band(l: float, u: float) -> "Scope":
        return Scope("quantile_band", l=l, u=u)

    @staticmethod
    def interval(lo: float, hi: float) -> "Scope":
        return Scope("interval", lo=lo, hi=hi)

    def to_json(self) -> dict:
        if self.kind == "full":
            return {"kind": "full"}
        if self.kind == "quantile_band":
            return {"kind": "quantile_band", "l": self.l, "u": self.u}
        return {"kind": "interval", "lo": self.lo, "hi": self.hi}

    @staticmethod
    def from_json(obj) -> "Scope":
        if obj is None or obj == "full":
            return Scope.full()
        kind = obj.get("kind", "full")
        if kind == "full":
            return Scope.full()
        if kind == "quantile_band":
            return Scope.quantile_band(float(obj["l"]), float(obj["u"]))
        if kind == "interval":
            return Scope.interval(float(obj["lo"]), float(obj["hi"]))
        raise ValueError(f"unknown scope kind {kind!r}")

    def label(self) -> str:
        if self.kind == "full":
            return "full"
        if self.kind == "quantile_band":
            return f"band({self.l},{self.u})"
        return f"interval({self.lo},{self.hi})"


@dataclass(frozen=True)
class MeasureSpec:
    """One cell of the measure lattice.

    ``epsilon`` may stay None on eps_accuracy specs; the evaluation fills it
    with the default rule (see :func:`default_epsilon`).  ``q`` is required
    for quantile aggregation, ``x_star`` for point localization.
    """

    localization: str
    characteristic: str
    loss: str
    axis: str | None = None
    aggregation: str | None = None
    scope: Scope = Scope("full")
    epsilon: float | None = None
    q: float | None = None
    x_star: float | None = None

    def replace(self, **kw) -> "MeasureSpec":
        return dataclasses.replace(self, **kw)

    def label(self) -> str:
        """Short deterministic identifier used in table headers."""
        if self.localization == "point":
            parts = ["point", self.characteristic, self.loss, f"x*={self.x_star}"]
        else:
            parts = ["range", self.axis or "?", self.aggregation or "?",
                     self.scope.label(), self.characteristic, self.loss]
        if self.loss == "eps_accuracy" and self.epsilon is not None:
            parts.append(f"eps={self.epsilon}")
        if self.aggregation == "quantile_Fx" and self.q is not None:
            parts.append(f"q={self.q}")
        return "|".join(parts)

    def to_json(self) -> dict:
        return {
            "localization": self.localization,
            "characteristic": self.characteristic,
            "loss": self.loss,
            "axis": self.axis,
            "aggregation": self.aggregation,
            "scope": self.scope.to_json() if self.localization == "range" else None,
            "epsilon": self.epsilon,
            "q": self.q,
            "x_star": self.x_star,
        }

    @staticmethod
    def from_json(obj: dict) -> "MeasureSpec":
        return MeasureSpec(
            localization=obj["localization"],
            characteristic=obj["characteristic"],
            loss=obj["loss"],
            axis=obj.get("axis"),
            aggregation=obj.get("aggregation"),
            scope=Scope.from_json(obj.get("scope")),
            epsilon=obj.get("epsilon"),
            q=obj.get("q"),
            x_star=obj.get("x_star"),
        )


def validate(spec: MeasureSpec) -> list[str]:
    """All violations of the aspect rules; empty when the spec is legal."""
    v: list[str] = []
    if spec.localization not in LOCALIZATIONS:
        v.append(f"unknown localization {spec.localization!r}")
        return v
    if spec.characteristic not in CHARACTERISTICS:
        v.append(f"unknown characteristic {spec.characteristic!r}")
    if spec.loss not in LOSSES:
        v.append(f"unknown loss {spec.loss!r}")

    if spec.localization == "point":
        if spec.x_star is None:
            v.append("point localization requires x_star")
        if spec.axis is not None:
            v.append("point localization forbids axis")
        if spec.aggregation is not None:
            v.append("point localization forbids aggregation")
        if spec.scope.kind != "full":
            v.append("point localization forbids scope")
    else:
        if spec.axis not in AXES:
            v.append(f"range localization requires axis in {AXES}")
        elif spec.axis == "Y":
            if spec.aggregation not in Y_AGGREGATIONS:
                v.append(f"axis Y requires aggregation in {Y_AGGREGATIONS}")
        else:
            if spec.aggregation not in X_AGGREGATIONS:
                v.append(f"axis X requires aggregation in {X_AGGREGATIONS}")
        if spec.x_star is not None:
            v.append("x_star is only valid for point localization")
        if spec.scope.kind not in SCOPE_KINDS:
            v.append(f"unknown scope kind {spec.scope.kind!r}")
        elif spec.scope.kind == "quantile_band":
            l, u = spec.scope.l, spec.scope.u
            if l is None or u is None or not (0.0 <= l < u <= 1.0):
                v.append("quantile_band requires 0 <= l < u <= 1")
        elif spec.scope.kind == "interval":
            lo, hi = spec.scope.lo, spec.scope.hi
            if lo is None or hi is None or not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                v.append("interval scope requires finite lo < hi")

    if spec.aggregation == "quantile_Fx":
        if spec.q is None:
            v.append("q required")
        elif not (0.0 <= spec.q <= 1.0):
            v.append("q must lie in [0, 1]")
    if spec.loss == "eps_accuracy":
        if spec.epsilon is not None and spec.epsilon <= 0.0:
            v.append("eps_accuracy requires epsilon > 0")
    return v


def resolve_scope(spec: MeasureSpec, d: PredictorDistribution) -> tuple[float, float]:
    """Concrete interval S for a range spec; raises on an empty result."""
    a, b = d.domain
    sc = spec.scope
    if sc.kind == "full":
        return a, b
    if sc.kind == "quantile_band":
        lo, hi = float(d.quantile(sc.l)), float(d.quantile(sc.u))
        if not lo < hi:
            raise DegenerateScopeError(
                f"quantile band ({sc.l}, {sc.u}) collapses to a zero-length interval"
            )
        return lo, hi
    lo, hi = max(a, sc.lo), min(b, sc.hi)
    if not lo < hi:
        raise DegenerateScopeError(
            f"interval [{sc.lo}, {sc.hi}] does not intersect the domain [{a}, {b}]"
        )
    return lo, hi


def characteristic_curve(curve: Curve, characteristic: str) -> Curve:
    if characteristic == "function":
        return curve
    if characteristic == "first_derivative":
        return curve.derivative(1)
    if characteristic == "second_derivative":
        return curve.derivative(2)
    raise ValueError(f"unknown characteristic {characteristic!r}")


def default_epsilon(spec: MeasureSpec, truth: Curve, d: PredictorDistribution) -> float:
    """Default accuracy band when epsilon is unset: 5% of the x extent for
    point localization and X-axis measures, 5% of the spread of the truth
    characteristic over the scope for Y-axis measures."""
    if spec.localization == "point":
        a, b = truth.domain
        return DEFAULT_EPSILON_FRACTION * (b - a)
    lo, hi = resolve_scope(spec, d)
    if spec.axis == "X":
        return DEFAULT_EPSILON_FRACTION * (hi - lo)
    g = characteristic_curve(truth, spec.characteristic)
    grid = EvaluationGrid.nodes((lo, hi), DEFAULT_CELLS, breakpoints=g.knots)
    vals = g.values(grid.points)
    spread = float(np.max(vals) - np.min(vals))
    if spread <= 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
        raise SpecValidationError(
            ["default epsilon undefined: truth characteristic is constant on the scope"]
        )
    return DEFAULT_EPSILON_FRACTION * spread


def _loss_values(loss: str, est_vals, truth_vals, eps: float | None):
    diff = np.asarray(est_vals, dtype=float) - np.asarray(truth_vals, dtype=float)
    if loss == "difference":
        return diff
    if loss == "absolute":
        return np.abs(diff)
    if loss == "squared":
        return diff * diff
    if loss == "eps_accuracy":
        return (np.abs(diff) <= eps).astype(float)
    raise ValueError(f"unknown loss {loss!r}")


def _loss_scalar(loss: str, est_stat: float, truth_stat: float, eps: float | None) -> float:
    return float(_loss_values(loss, np.asarray([est_stat]), np.asarray([truth_stat]), eps)[0])


def measure_direction(spec: MeasureSpec) -> str:
    """Ranking direction: "smaller", "smaller_abs" or "larger" is better.
    Divergent values always rank last."""
    if spec.loss == "eps_accuracy":
        return "larger"
    if spec.loss == "difference":
        return "smaller_abs"
    return "smaller"


def _require_shared_domain(truth: Curve, estimate: Curve, d: PredictorDistribution) -> None:
    td, ed, dd = truth.domain, estimate.domain, d.domain
    span = max(td[1] - td[0], 1e-30)
    for other in (ed, dd):
        if abs(other[0] - td[0]) > 1e-9 * span or abs(other[1] - td[1]) > 1e-9 * span:
            raise SpecValidationError(
                [f"curves and distribution must share a domain ({td} vs {other})"]
            )


def _interior_knots(*curves: Curve):
    return np.concatenate([c.knots[1:-1] for c in curves]) if curves else ()


def _extremum_eval(losses, grid: EvaluationGrid, mode: str) -> EvalValue:
    bad = ~np.isfinite(losses)
    if np.any(bad):
        n_bad = int(np.count_nonzero(bad))
        if mode == "max" and np.any(losses == math.inf):
            return EvalValue(math.inf, True, n_bad)
        if mode == "min" and np.any(losses == -math.inf):
            return EvalValue(-math.inf, True, n_bad)
        return EvalValue(math.nan, True, n_bad)
    value, _ = grid_extremum(losses, grid, mode)
    return EvalValue(value)


def _quantile_eval(losses, q: float) -> EvalValue:
    with np.errstate(invalid="ignore"):
        offending = ~np.isfinite(losses) | (np.abs(losses) > DIVERGENCE_THRESHOLD)
    n_bad = int(np.count_nonzero(offending))
    val = empirical_quantile(losses, q) if not np.any(np.isnan(losses)) else math.nan
    if math.isnan(val):
        return EvalValue(math.nan, True, n_bad)
    if not math.isfinite(val) or abs(val) > DIVERGENCE_THRESHOLD:
        return EvalValue(math.inf if val > 0 else -math.inf, True, n_bad)
    return EvalValue(float(val), False, n_bad)


def _x_statistic(aggregation: str, vals, grid: EvaluationGrid) -> float:
    if aggregation == "num_roots":
        return float(count_roots(vals))
    mode = "max" if aggregation == "argmax_location" else "min"
    _, loc = grid_extremum(vals, grid, mode)
    return loc


def evaluate(
    spec: MeasureSpec,
    truth: Curve,
    estimate: Curve,
    d: PredictorDistribution,
    precision: Curve | None = None,
    n_cells: int = DEFAULT_CELLS,
    normalize_precision: bool = False,
) -> EvalValue:
    """Evaluate one measure of the estimate against the truth.

    ``precision`` is required by precision-weighted aggregation;
    ``normalize_precision`` divides that aggregate by the integral of the
    precision curve over the scope (off by default).  ``n_cells`` controls
    the quadrature and scan resolution.
    """
    violations = validate(spec)
    if violations:
        raise SpecValidationError(violations)
    _require_shared_domain(truth, estimate, d)

    gt = characteristic_curve(truth, spec.characteristic)
    ge = characteristic_curve(estimate, spec.characteristic)

    if spec.localization == "point":
        a, b = truth.domain
        if not a <= spec.x_star <= b:
            raise DomainError(f"x_star {spec.x_star} outside domain [{a}, {b}]")
        eps = spec.epsilon
        if spec.loss == "eps_accuracy" and eps is None:
            eps = default_epsilon(spec, truth, d)
        return EvalValue(_loss_scalar(spec.loss, ge(spec.x_star), gt(spec.x_star), eps))

    lo, hi = resolve_scope(spec, d)
    eps = spec.epsilon
    if spec.loss == "eps_accuracy" and eps is None:
        eps = default_epsilon(spec, truth, d)

    if spec.axis == "X":
        grid = EvaluationGrid.nodes((lo, hi), n_cells, breakpoints=_interior_knots(gt, ge))
        tv = gt.values(grid.points)
        ev = ge.values(grid.points)
        if not (np.all(np.isfinite(tv)) and np.all(np.isfinite(ev))):
            return EvalValue(math.nan, True, int(np.count_nonzero(~np.isfinite(tv)) + np.count_nonzero(~np.isfinite(ev))))
        stat_t = _x_statistic(spec.aggregation, tv, grid)
        stat_e = _x_statistic(spec.aggregation, ev, grid)
        return EvalValue(_loss_scalar(spec.loss, stat_e, stat_t, eps))

    # axis Y
    agg = spec.aggregation
    if agg in ("max", "min"):
        grid = EvaluationGrid.nodes((lo, hi), n_cells, breakpoints=_interior_knots(gt, ge))
        losses = _loss_values(spec.loss, ge.values(grid.points), gt.values(grid.points), eps)
        return _extremum_eval(losses, grid, agg)

    if agg == "quantile_Fx":
        xs = truncated_prob_grid(d, (lo, hi), n_cells)
        losses = _loss_values(spec.loss, ge.values(xs), gt.values(xs), eps)
        return _quantile_eval(losses, spec.q)

    if agg == "expectation_dFx" and d.kind == "empirical":
        # literal expectation under the ECDF: mean over sample points inside
        # the scope, never renormalized by the truncated mass
        inside = d.values[(d.values >= lo) & (d.values <= hi)]
        if inside.size == 0:
            return EvalValue(0.0)
        losses = _loss_values(spec.loss, ge.values(inside), gt.values(inside), eps)
        return weighted_sum(losses, np.full(inside.size, 1.0 / d.values.size))

    knots = [gt.knots[1:-1], ge.knots[1:-1]]
    if agg == "precision_weighted":
        if precision is None:
            raise SpecValidationError(["precision_weighted requires a precision curve"])
        knots.append(precision.knots[1:-1])
    grid = EvaluationGrid.midpoint((lo, hi), n_cells, breakpoints=np.concatenate(knots))
    losses = _loss_values(spec.loss, ge.values(grid.points), gt.values(grid.points), eps)

    if agg == "integral_dx":
        return riemann(losses, grid)
    if agg == "expectation_dFx":
        return riemann(losses * d.pdf(grid.points), grid)
    if agg == "precision_weighted":
        weights = precision.values(grid.points)
        out = riemann(losses * weights, grid)
        if normalize_precision and out.finite:
            total = riemann(weights, grid)
            if not total.finite or total.value <= 0:
                raise SpecValidationError(["precision curve must have positive finite mass"])
            out = EvalValue(out.value / total.value, out.divergent, out.n_nonfinite)
        return out
    raise ValueError(f"unknown aggregation {agg!r}")


def evaluate_bivariable(
    loss: str,
    truth: BivariateCurve,
    estimate: BivariateCurve,
    joint: BivariateCurve,
    epsilon: float | None = None,
) -> EvalValue:
    """Two-predictor expectation of the pointwise loss: midpoint sums of
    loss * joint density over the tensor-grid sub-rectangles.  All three
    surfaces must share the same grid."""
    if loss not in LOSSES:
        raise SpecValidationError([f"unknown loss {loss!r}"])
    if loss == "eps_accuracy" and (epsilon is None or epsilon <= 0):
        raise SpecValidationError(["eps_accuracy requires epsilon > 0"])
    for other in (estimate, joint):
        if not (np.array_equal(truth.x1, other.x1) and np.array_equal(truth.x2, other.x2)):
            raise SpecValidationError(["surfaces must share one tensor grid"])
    m1 = 0.5 * (truth.x1[:-1] + truth.x1[1:])
    m2 = 0.5 * (truth.x2[:-1] + truth.x2[1:])
    areas = np.outer(np.diff(truth.x1), np.diff(truth.x2))
    uu, vv = np.meshgrid(m1, m2, indexing="ij")
    losses = _loss_values(loss, estimate.value(uu, vv), truth.value(uu, vv), epsilon)
    weights = joint.value(uu, vv)
    return weighted_sum((losses * weights).ravel(), areas.ravel())
