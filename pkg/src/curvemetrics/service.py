"""HTTP service over the scenario store and the measure engine.

Endpoints serve sampled curves for plotting, evaluate single measures,
and run single-measure panels with ranks.  Errors come back as JSON
objects {code, message, field} with 400 for invalid requests, 404 for
unknown names and 422 for degenerate scopes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .distributions import PredictorDistribution
from .errors import (
    CurveMetricsError,
    DegenerateScopeError,
    DomainError,
    SpecValidationError,
    UnsupportedOperationError,
)
from .kernels import EvalValue
from .measures import (
    AXES,
    CHARACTERISTICS,
    LOCALIZATIONS,
    LOSSES,
    SCOPE_KINDS,
    X_AGGREGATIONS,
    Y_AGGREGATIONS,
    MeasureSpec,
    measure_direction,
    resolve_scope,
    validate,
)
from .study import Scenario, ScenarioStore, rank_values

__all__ = ["create_app", "DISTRIBUTION_OPTIONS"]

#: Switchable predictor distributions offered to clients.
DISTRIBUTION_OPTIONS = {
    "beta_2_2": (2.0, 2.0),
    "beta_2_5": (2.0, 5.0),
    "beta_5_2": (5.0, 2.0),
}

SAMPLES = 512
DENSITY_SAMPLES = 257

# aspect keywords scanned out of validation messages for the error field
_FIELD_KEYS = (
    "localization", "characteristic", "loss", "axis", "aggregation",
    "scope", "epsilon", "x_star", "q",
)


def _field_of(message: str) -> str | None:
    for key in _FIELD_KEYS:
        if key in message:
            return key
    return None


class _ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.field = field


def _sampled(curve) -> dict:
    lo, hi = curve.domain
    xs = np.linspace(lo, hi, SAMPLES)
    return {"x": xs.tolist(), "y": curve.values(xs).tolist()}


def _distribution_descriptor(d: PredictorDistribution) -> dict:
    lo, hi = d.domain
    out = {"kind": d.kind, "domain": [lo, hi]}
    if d.kind == "beta":
        out["alpha"] = d.alpha
        out["beta"] = d.beta
        xs = np.linspace(lo, hi, DENSITY_SAMPLES)
        try:
            out["density"] = {"x": xs.tolist(), "y": d.pdf(xs).tolist()}
        except UnsupportedOperationError:
            pass
        out["q05"] = d.quantile(0.05)
        out["q95"] = d.quantile(0.95)
    else:
        out["values"] = list(d.values)
        out["q05"] = d.quantile(0.05)
        out["q95"] = d.quantile(0.95)
    return out


def _resolve_distribution(scenario: Scenario, key) -> PredictorDistribution:
    if key in (None, "", "default"):
        return scenario.distribution
    if key not in DISTRIBUTION_OPTIONS:
        raise _ApiError(400, "validation_error",
                        f"unknown distribution option {key!r}", "distribution")
    alpha, beta = DISTRIBUTION_OPTIONS[key]
    return PredictorDistribution.beta_on(scenario.domain, alpha, beta)


def _parse_spec(payload) -> MeasureSpec:
    if not isinstance(payload, dict):
        raise _ApiError(400, "validation_error", "spec must be an object", "spec")
    try:
        spec = MeasureSpec.from_json(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise _ApiError(400, "validation_error", f"malformed spec: {exc}", "spec")
    problems = validate(spec)
    if problems:
        raise _ApiError(400, "validation_error", "; ".join(problems),
                        _field_of(problems[0]))
    return spec


def _get_scenario(store: ScenarioStore, name) -> Scenario:
    if not isinstance(name, str) or not name:
        raise _ApiError(400, "validation_error", "scenario name required", "scenario")
    try:
        return store.get(name)
    except KeyError:
        raise _ApiError(404, "not_found", f"unknown scenario {name!r}", "scenario")


def _eval_payload(value: EvalValue) -> dict:
    return {
        "value": value.to_json_value(),
        "divergent": value.divergent,
        "n_nonfinite": value.n_nonfinite,
    }


def create_app(store: ScenarioStore | None = None, frontend_dir: str | None = None) -> FastAPI:
    """Build the service; pass a ScenarioStore to control scenario lookup."""
    app = FastAPI(title="curvemetrics", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.store = store or ScenarioStore()

    @app.exception_handler(_ApiError)
    async def on_api_error(request: Request, exc: _ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "field": exc.field},
        )

    @app.exception_handler(RequestValidationError)
    async def on_body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation_error", "message": str(exc), "field": None},
        )

    def current_store() -> ScenarioStore:
        return app.state.store

    @app.get("/scenarios")
    def list_scenarios():
        store = current_store()
        out = []
        for name in store.names():
            s = store.get(name)
            out.append({
                "name": s.name,
                "title": s.title,
                "domain": list(s.domain),
                "estimates": list(s.estimates),
                "has_precision": sorted(s.precision),
                "distribution": {"kind": s.distribution.kind,
                                 **({"alpha": s.distribution.alpha,
                                     "beta": s.distribution.beta}
                                    if s.distribution.kind == "beta" else {})},
            })
        return {"scenarios": out}

    @app.get("/scenarios/{name}")
    def scenario_detail(name: str):
        s = _get_scenario(current_store(), name)
        return {
            "name": s.name,
            "title": s.title,
            "domain": list(s.domain),
            "truth": _sampled(s.truth),
            "estimates": {k: _sampled(c) for k, c in s.estimates.items()},
            "precision": {k: _sampled(c) for k, c in s.precision.items()},
            "distribution": _distribution_descriptor(s.distribution),
            "distribution_options": {
                key: _distribution_descriptor(
                    PredictorDistribution.beta_on(s.domain, *params)
                )
                for key, params in DISTRIBUTION_OPTIONS.items()
            },
        }

    @app.post("/evaluate")
    def evaluate_endpoint(body: dict):
        from .measures import evaluate as run_measure

        store = current_store()
        s = _get_scenario(store, body.get("scenario"))
        estimate = body.get("estimate")
        if estimate not in s.estimates:
            raise _ApiError(404, "not_found", f"unknown estimate {estimate!r}", "estimate")
        spec = _parse_spec(body.get("spec"))
        d = _resolve_distribution(s, body.get("distribution"))
        try:
            value = run_measure(
                spec, s.truth, s.estimates[estimate], d,
                precision=s.precision.get(estimate),
            )
        except DegenerateScopeError as exc:
            raise _ApiError(422, "degenerate_scope", str(exc), "scope")
        except SpecValidationError as exc:
            raise _ApiError(400, "validation_error", str(exc), _field_of(str(exc)))
        except DomainError as exc:
            raise _ApiError(400, "validation_error", str(exc), "x_star")
        return _eval_payload(value)

    @app.post("/panel")
    def panel_endpoint(body: dict):
        from .measures import evaluate as run_measure

        store = current_store()
        s = _get_scenario(store, body.get("scenario"))
        spec = _parse_spec(body.get("spec"))
        d = _resolve_distribution(s, body.get("distribution"))
        scope = None
        if spec.localization == "range":
            try:
                scope = list(resolve_scope(spec, d))
            except DegenerateScopeError as exc:
                raise _ApiError(422, "degenerate_scope", str(exc), "scope")
        results = []
        for name, curve in s.estimates.items():
            try:
                value = run_measure(spec, s.truth, curve, d,
                                    precision=s.precision.get(name))
                results.append({"estimate": name, **_eval_payload(value)})
            except DegenerateScopeError as exc:
                raise _ApiError(422, "degenerate_scope", str(exc), "scope")
            except (CurveMetricsError, ValueError, ArithmeticError) as exc:
                results.append({
                    "estimate": name, "value": None, "divergent": False,
                    "error": f"{type(exc).__name__}: {exc}",
                })
        column = [
            EvalValue.from_json_value(r["value"]) if r.get("error") is None and r["value"] is not None else None
            for r in results
        ]
        for r, rank in zip(results, rank_values(column, measure_direction(spec))):
            r["rank"] = rank
        return {
            "scenario": s.name,
            "measure": {**spec.to_json(), "label": spec.label(),
                        "direction": measure_direction(spec)},
            "scope": scope,
            "results": results,
        }

    @app.get("/measures/schema")
    def measures_schema():
        return {
            "localization": list(LOCALIZATIONS),
            "characteristic": list(CHARACTERISTICS),
            "loss": list(LOSSES),
            "axis": list(AXES),
            "aggregation": {"Y": list(Y_AGGREGATIONS), "X": list(X_AGGREGATIONS)},
            "scope_kinds": list(SCOPE_KINDS),
            "distributions": ["default", *DISTRIBUTION_OPTIONS],
            "rules": {
                "point": {"requires": ["x_star"],
                          "forbids": ["axis", "aggregation", "scope", "q"]},
                "range": {"requires": ["axis", "aggregation"], "forbids": ["x_star"]},
                "eps_accuracy": {"optional": ["epsilon"]},
                "quantile_Fx": {"requires": ["q"]},
                "precision_weighted": {"requires": ["precision"]},
            },
            "serialization": {"infinite": ["inf", "-inf"], "undefined": "undefined"},
        }

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=frontend_dir, html=True), name="app")

    return app
