"""Scenario registry, panel evaluation with ranking, and similarity mode.

A scenario bundles a ground truth, a named family of candidate estimates,
and the predictor distribution they are judged under.  evaluate_panel runs
a list of measures over every estimate and ranks each column; similarity
applies a measure to two estimates instead of estimate vs truth.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .curves import Curve, from_samples
from .distributions import PredictorDistribution
from .errors import CurveMetricsError, SpecValidationError
from .fitting import Basis, Dataset, fit_basis, fit_fractional_polynomial, precision_curve
from .kernels import DEFAULT_CELLS, EvalValue
from .measures import MeasureSpec, Scope, evaluate, measure_direction, validate

__all__ = [
    "Scenario",
    "ScenarioStore",
    "PanelCell",
    "RankTable",
    "bundled_scenarios",
    "standard_panel",
    "evaluate_panel",
    "rank_values",
    "similarity",
    "SCENARIO_DIR_ENV",
]

SCENARIO_DIR_ENV = "CURVEMETRICS_SCENARIO_DIR"

# values this close (after the direction transform) share a rank
TIE_TOL = 1e-12

DOMAIN_TOL = 1e-9


def _domains_agree(a: tuple[float, float], b: tuple[float, float]) -> bool:
    span = max(a[1] - a[0], b[1] - b[0], 1.0)
    return abs(a[0] - b[0]) <= DOMAIN_TOL * span and abs(a[1] - b[1]) <= DOMAIN_TOL * span


@dataclass(frozen=True, eq=False)
class Scenario:
    """Named evaluation setting: truth, candidate estimates, distribution.

    precision maps estimate names to their pointwise-precision curves; only
    estimates produced by an actual fit carry one.
    """

    name: str
    title: str
    truth: Curve
    estimates: dict[str, Curve]
    distribution: PredictorDistribution
    precision: dict[str, Curve] | None = None

    def __post_init__(self) -> None:
        if self.precision is None:
            object.__setattr__(self, "precision", {})
        problems = []
        if not self.name:
            problems.append("scenario name must be non-empty")
        if not self.estimates:
            problems.append("scenario needs at least one estimate")
        for label, curve in self.estimates.items():
            if not _domains_agree(curve.domain, self.truth.domain):
                problems.append(f"estimate {label!r} domain differs from truth")
        if not _domains_agree(self.distribution.domain, self.truth.domain):
            problems.append("distribution domain differs from truth")
        unknown = set(self.precision) - set(self.estimates)
        if unknown:
            problems.append(f"precision given for unknown estimates {sorted(unknown)}")
        if problems:
            raise SpecValidationError(problems)

    @property
    def domain(self) -> tuple[float, float]:
        return self.truth.domain

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "title": self.title,
            "truth": self.truth.to_json(),
            "estimates": {k: c.to_json() for k, c in self.estimates.items()},
            "distribution": self.distribution.to_json(),
            "precision": {k: c.to_json() for k, c in self.precision.items()},
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Scenario":
        return cls(
            name=payload["name"],
            title=payload.get("title", payload["name"]),
            truth=Curve.from_json(payload["truth"]),
            estimates={k: Curve.from_json(v) for k, v in payload["estimates"].items()},
            distribution=PredictorDistribution.from_json(payload["distribution"]),
            precision={k: Curve.from_json(v) for k, v in payload.get("precision", {}).items()},
        )


# ------------------------------------------------------------------ panels


@dataclass(frozen=True)
class PanelCell:
    """One (estimate, measure) result; error cells carry no value or rank."""

    value: EvalValue | None
    rank: int | None = None
    error: str | None = None

    def to_json(self) -> dict:
        if self.error is not None:
            return {"value": None, "divergent": False, "rank": None, "error": self.error}
        return {
            "value": self.value.to_json_value(),
            "divergent": self.value.divergent,
            "rank": self.rank,
        }


@dataclass(frozen=True, eq=False)
class RankTable:
    """Estimates (rows) against measures (columns), each cell valued and ranked."""

    scenario: str
    estimates: tuple[str, ...]
    measures: tuple[MeasureSpec, ...]
    directions: tuple[str, ...]
    cells: tuple[tuple[PanelCell, ...], ...]  # indexed [estimate][measure]

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "estimates": list(self.estimates),
            "measures": [
                {**spec.to_json(), "label": spec.label(), "direction": direction}
                for spec, direction in zip(self.measures, self.directions)
            ],
            "cells": [[cell.to_json() for cell in row] for row in self.cells],
        }

    def to_csv(self) -> str:
        import csv as _csv
        import io

        buf = io.StringIO()
        writer = _csv.writer(buf, lineterminator="\n")
        header = ["estimate"]
        for spec in self.measures:
            header += [f"{spec.label()} value", f"{spec.label()} rank"]
        writer.writerow(header)
        for name, row in zip(self.estimates, self.cells):
            out = [name]
            for cell in row:
                if cell.error is not None:
                    out += [f"error: {cell.error}", ""]
                else:
                    out += [str(cell.value.to_json_value()), "" if cell.rank is None else str(cell.rank)]
            writer.writerow(out)
        return buf.getvalue()


def rank_values(values: list[EvalValue | None], direction: str) -> list[int | None]:
    """Competition ranks for one measure column.

    Finite values are ordered by the measure direction; values whose keys
    sit within 1e-12 of their neighbor chain into one group sharing the
    smallest position.  Divergent and undefined results share the rank just
    below every finite one; None entries (errors) stay unranked.
    """
    scored: list[tuple[float, int]] = []
    worst: list[int] = []
    for i, v in enumerate(values):
        if v is None:
            continue
        if v.divergent or v.undefined:
            worst.append(i)
            continue
        if direction == "smaller_abs":
            key = abs(v.value)
        elif direction == "larger":
            key = -v.value
        else:
            key = v.value
        scored.append((key, i))
    scored.sort()
    ranks: list[int | None] = [None] * len(values)
    group_rank = 1
    for position, (key, i) in enumerate(scored):
        if position == 0 or key - scored[position - 1][0] > TIE_TOL:
            group_rank = position + 1
        ranks[i] = group_rank
    for i in worst:
        ranks[i] = len(scored) + 1
    return ranks


def evaluate_panel(
    scenario: Scenario,
    specs: list[MeasureSpec],
    n_cells: int = DEFAULT_CELLS,
    max_workers: int | None = None,
) -> RankTable:
    """Evaluate every (estimate, measure) cell and rank each measure column.

    Cell-level failures (degenerate scope, missing precision, arithmetic
    breakdown) are recorded in the cell; they never abort the panel.
    """
    if not specs:
        raise SpecValidationError(["measure list must not be empty"])
    problems = []
    for spec in specs:
        problems += [f"{spec.label()}: {v}" for v in validate(spec)]
    if problems:
        raise SpecValidationError(problems)

    names = tuple(scenario.estimates)
    directions = tuple(measure_direction(spec) for spec in specs)

    def run_cell(name: str, spec: MeasureSpec):
        try:
            value = evaluate(
                spec,
                scenario.truth,
                scenario.estimates[name],
                scenario.distribution,
                precision=scenario.precision.get(name),
                n_cells=n_cells,
            )
            return PanelCell(value=value)
        except (CurveMetricsError, ValueError, ArithmeticError) as exc:
            return PanelCell(value=None, error=f"{type(exc).__name__}: {exc}")

    jobs = [(name, spec) for name in names for spec in specs]
    workers = max_workers or min(8, len(jobs))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        flat = list(pool.map(lambda job: run_cell(*job), jobs))
    grid = [list(flat[r * len(specs): (r + 1) * len(specs)]) for r in range(len(names))]

    for mi, direction in enumerate(directions):
        column = [grid[ri][mi].value if grid[ri][mi].error is None else None for ri in range(len(names))]
        for ri, rank in enumerate(rank_values(column, direction)):
            if grid[ri][mi].error is None:
                grid[ri][mi] = replace(grid[ri][mi], rank=rank)

    return RankTable(
        scenario=scenario.name,
        estimates=names,
        measures=tuple(specs),
        directions=directions,
        cells=tuple(tuple(row) for row in grid),
    )


def standard_panel() -> list[MeasureSpec]:
    """The eleven-measure bundle used by the panel views."""
    band = Scope.quantile_band(0.05, 0.95)

    def r(characteristic, loss, aggregation, scope=Scope.full()):
        return MeasureSpec(
            "range", characteristic, loss, axis="Y", aggregation=aggregation, scope=scope
        )

    return [
        r("function", "absolute", "integral_dx"),
        r("first_derivative", "absolute", "integral_dx"),
        r("second_derivative", "absolute", "integral_dx"),
        r("second_derivative", "absolute", "integral_dx", band),
        r("function", "absolute", "max"),
        r("function", "absolute", "max", band),
        r("function", "squared", "integral_dx"),
        r("function", "squared", "expectation_dFx"),
        r("function", "difference", "integral_dx"),
        r("first_derivative", "absolute", "expectation_dFx"),
        r("first_derivative", "squared", "expectation_dFx"),
    ]


# -------------------------------------------------------------- similarity


def similarity(
    spec: MeasureSpec,
    est1: Curve,
    est2: Curve,
    d: PredictorDistribution,
    precision_diff: Curve | None = None,
    n_cells: int = DEFAULT_CELLS,
) -> tuple[EvalValue, ...]:
    """Apply a measure to a pair of estimates.

    Signed (difference-loss) results are symmetrized by taking the absolute
    value after aggregation, except for max/min aggregation where the signed
    pair (max difference, min difference) is returned, oriented as first
    estimate minus second.  Quantile aggregation of a signed loss is only
    order-independent at q = 0.5.
    """
    problems = validate(spec)
    if problems:
        raise SpecValidationError(problems)
    if spec.loss == "difference" and spec.aggregation in ("max", "min"):
        pair = []
        for agg in ("max", "min"):
            out = evaluate(
                spec.replace(aggregation=agg), est2, est1, d,
                precision=precision_diff, n_cells=n_cells,
            )
            pair.append(out)
        return tuple(pair)
    out = evaluate(spec, est2, est1, d, precision=precision_diff, n_cells=n_cells)
    if spec.loss == "difference":
        out = abs(out)
    return (out,)


# ---------------------------------------------------------- bundled corpus


def _dense(f, domain=(0.0, 1.0), n=512) -> Curve:
    xs = np.linspace(domain[0], domain[1], n)
    return from_samples(np.column_stack([xs, f(xs)]), method="natural-cubic")


def _graded_root(scale: float) -> Curve:
    # knots grade geometrically into 0 so the unbounded derivative of
    # scale * sqrt(x) stays visible to knot-aligned evaluation grids
    graded = np.geomspace(1e-16, 0.05, 35)
    xs = np.concatenate([[0.0], graded, np.linspace(0.05, 1.0, 96)[1:]])
    return from_samples(np.column_stack([xs, scale * np.sqrt(xs)]), method="natural-cubic")


def _refit(truth: Curve, basis: Basis):
    xs = np.linspace(truth.domain[0], truth.domain[1], 257)
    return fit_basis(Dataset(xs, truth.values(xs)), basis)


@lru_cache(maxsize=1)
def _bundled() -> tuple[Scenario, ...]:
    beta22 = PredictorDistribution.beta_on((0.0, 1.0), 2.0, 2.0)
    uniform = PredictorDistribution.beta_on((0.0, 1.0), 1.0, 1.0)
    scenarios = []

    # (a) sigmoid rise
    truth = _dense(lambda x: 1.0 / (1.0 + np.exp(-12.0 * (x - 0.5))))
    lin = _refit(truth, Basis("linear"))
    cubic = _refit(truth, Basis("polynomial", degree=3))
    scenarios.append(Scenario(
        name="sigmoid",
        title="Sigmoid rise",
        truth=truth,
        estimates={
            "A": lin.curve,
            "B": _dense(lambda x: 1.0 / (1.0 + np.exp(-12.0 * (x - 0.55)))),
            "C": _dense(lambda x: 1.0 / (1.0 + np.exp(-20.0 * (x - 0.5)))),
            "D": cubic.curve,
            "E": _dense(lambda x: 1.0 / (1.0 + np.exp(-12.0 * (x - 0.5))) + 0.06 * np.sin(6 * np.pi * x)),
        },
        distribution=beta22,
        precision={"A": precision_curve(lin).curve},
    ))

    # (b) single interior peak
    truth = Curve.from_polynomial((0.0, 1.0), [0.0, 0.0, 6.75, -6.75])  # peak 1 at 2/3
    lin = _refit(truth, Basis("linear"))
    quad = _refit(truth, Basis("polynomial", degree=2))
    tent = from_samples(
        np.array([[0.0, 0.0], [0.55, 1.05], [1.0, 0.0]]), method="piecewise-linear"
    )
    scenarios.append(Scenario(
        name="unimodal",
        title="Single peak",
        truth=truth,
        estimates={
            "A": lin.curve,
            "B": _dense(lambda x: 10.9 * x**2 * (1.0 - x) ** 1.5),
            "C": quad.curve,
            "D": truth.shifted(0.15),
            "E": tent,
        },
        distribution=beta22,
        precision={"A": precision_curve(lin).curve},
    ))

    # (c) saturating asymptote; estimate D has an unbounded derivative at 0
    truth = _dense(lambda x: x / (x + 0.1))
    lin = _refit(truth, Basis("linear"))
    cubic = _refit(truth, Basis("polynomial", degree=3))
    scenarios.append(Scenario(
        name="asymptote",
        title="Saturating asymptote",
        truth=truth,
        estimates={
            "A": lin.curve,
            "B": cubic.curve,
            "C": _dense(lambda x: x / (x + 0.18)),
            "D": _graded_root(0.95),
            "E": _dense(lambda x: np.log1p(20.0 * x) / np.log(21.0)),
        },
        distribution=uniform,
        precision={"A": precision_curve(lin).curve},
    ))

    # (d) falls, bottoms out, rebounds, declines near the right edge
    control = np.array([
        [0.0, 0.90], [0.12, 0.55], [0.25, 0.32], [0.40, 0.28], [0.55, 0.38],
        [0.70, 0.56], [0.82, 0.64], [0.92, 0.60], [1.0, 0.52],
    ])
    truth = from_samples(control, method="natural-cubic")
    lin = _refit(truth, Basis("linear"))
    rng = np.random.default_rng(20260815)
    xs = np.linspace(0.0, 1.0, 120)
    noisy = Dataset(xs, truth.values(xs) + 0.05 * rng.standard_normal(xs.size))
    fits = {
        "B": fit_fractional_polynomial(noisy, degree=2),
        "C": fit_basis(noisy, Basis("bspline", degree=1, n_basis=3)),
        "D": fit_basis(noisy, Basis("bspline", degree=3, n_basis=15)),
        "E": fit_basis(noisy, Basis("polynomial", degree=3)),
    }
    scenarios.append(Scenario(
        name="rebound",
        title="Dip and rebound",
        truth=truth,
        estimates={"A": lin.curve, **{k: m.curve for k, m in fits.items()}},
        distribution=beta22,
        precision={
            "A": precision_curve(lin).curve,
            **{k: precision_curve(m).curve for k, m in fits.items()},
        },
    ))
    return tuple(scenarios)


def bundled_scenarios() -> list[Scenario]:
    """The four built-in scenarios: sigmoid, unimodal, asymptote, rebound."""
    return list(_bundled())


# -------------------------------------------------------------- the store


class ScenarioStore:
    """Scenario lookup over the bundled corpus plus an optional directory.

    Directory entries are JSON files named <scenario>.json; they validate on
    load and shadow bundled scenarios with the same name.
    """

    def __init__(self, directory: str | os.PathLike | None = None, include_bundled: bool = True):
        if directory is None:
            directory = os.environ.get(SCENARIO_DIR_ENV) or None
        self._dir = Path(directory) if directory else None
        self._bundled = {s.name: s for s in bundled_scenarios()} if include_bundled else {}

    @property
    def directory(self) -> Path | None:
        return self._dir

    def _dir_names(self) -> list[str]:
        if self._dir is None or not self._dir.is_dir():
            return []
        return sorted(p.stem for p in self._dir.glob("*.json"))

    def names(self) -> list[str]:
        out = list(self._bundled)
        out += [n for n in self._dir_names() if n not in self._bundled]
        return out

    def get(self, name: str) -> Scenario:
        if self._dir is not None:
            path = self._dir / f"{name}.json"
            if path.is_file():
                with open(path) as fh:
                    return Scenario.from_json(json.load(fh))
        if name in self._bundled:
            return self._bundled[name]
        raise KeyError(f"unknown scenario {name!r}")

    def save(self, scenario: Scenario) -> Path:
        if self._dir is None:
            raise SpecValidationError(["no scenario directory configured"])
        self._dir.mkdir(parents=True, exist_ok=True)
        path = self._dir / f"{scenario.name}.json"
        with open(path, "w") as fh:
            json.dump(scenario.to_json(), fh, indent=2, sort_keys=True)
        return path
