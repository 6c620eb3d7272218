"""Command-line interface.

Subcommands: evaluate, panel, fit, similarity, serve, scenarios.
Exit codes: 0 success, 2 validation problem, 3 degenerate scope,
4 unwritable output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    CurveMetricsError,
    DegenerateScopeError,
    DomainError,
    SingularFitError,
    SpecValidationError,
)
from .fitting import Basis, Dataset, fit_basis, fit_fractional_polynomial, precision_curve
from .measures import MeasureSpec, Scope, evaluate, validate
from .study import ScenarioStore, evaluate_panel, similarity, standard_panel

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_UNWRITABLE = 4


def _add_spec_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", help="JSON file with a measure spec; flags override its fields")
    parser.add_argument("--localization", choices=["range", "point"])
    parser.add_argument("--characteristic",
                        choices=["function", "first_derivative", "second_derivative"])
    parser.add_argument("--loss", choices=["difference", "absolute", "squared", "eps_accuracy"])
    parser.add_argument("--axis", choices=["Y", "X"])
    parser.add_argument("--aggregation")
    parser.add_argument("--scope", help="full | quantile_band:L:U | interval:LO:HI")
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--q", type=float)
    parser.add_argument("--x-star", dest="x_star", type=float)


def _parse_scope(text: str) -> Scope:
    parts = text.split(":")
    if parts[0] == "full" and len(parts) == 1:
        return Scope.full()
    if parts[0] == "quantile_band" and len(parts) == 3:
        return Scope.quantile_band(float(parts[1]), float(parts[2]))
    if parts[0] == "interval" and len(parts) == 3:
        return Scope.interval(float(parts[1]), float(parts[2]))
    raise SpecValidationError([f"cannot parse scope {text!r}"])


def _spec_from_args(args) -> MeasureSpec:
    base = {
        "localization": "range",
        "characteristic": "function",
        "loss": "absolute",
        "axis": None,
        "aggregation": None,
        "scope": {"kind": "full"},
        "epsilon": None,
        "q": None,
        "x_star": None,
    }
    if args.spec:
        with open(args.spec) as fh:
            base.update(json.load(fh))
    for key in ("localization", "characteristic", "loss", "axis",
                "aggregation", "epsilon", "q", "x_star"):
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    if args.scope is not None:
        base["scope"] = _parse_scope(args.scope).to_json()
    if base["localization"] == "range" and base["axis"] is None:
        base["axis"] = "Y"
    if base["localization"] == "range" and base["aggregation"] is None:
        base["aggregation"] = "integral_dx"
    spec = MeasureSpec.from_json(base)
    problems = validate(spec)
    if problems:
        raise SpecValidationError(problems)
    return spec


def _store(args) -> ScenarioStore:
    return ScenarioStore(directory=getattr(args, "scenario_dir", None))


def _format(value) -> str:
    return str(value.to_json_value())


def cmd_evaluate(args) -> int:
    store = _store(args)
    scenario = store.get(args.scenario)
    if args.estimate not in scenario.estimates:
        raise SpecValidationError([f"unknown estimate {args.estimate!r}"])
    spec = _spec_from_args(args)
    value = evaluate(
        spec, scenario.truth, scenario.estimates[args.estimate],
        scenario.distribution, precision=scenario.precision.get(args.estimate),
    )
    print(_format(value))
    return EXIT_OK


def cmd_panel(args) -> int:
    store = _store(args)
    scenario = store.get(args.scenario)
    if args.measures:
        with open(args.measures) as fh:
            payload = json.load(fh)
        specs = [MeasureSpec.from_json(item) for item in payload]
    else:
        specs = standard_panel()
    table = evaluate_panel(scenario, specs)
    if args.format == "csv":
        text = table.to_csv()
    else:
        text = json.dumps(table.to_json(), indent=2, sort_keys=True) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_UNWRITABLE
    return EXIT_OK


def cmd_fit(args) -> int:
    data = Dataset.from_csv(args.data)
    if args.basis.startswith("fracpoly"):
        parts = args.basis.split(":")
        degree = int(parts[1]) if len(parts) == 2 else 1
        model = fit_fractional_polynomial(data, degree=degree)
    else:
        model = fit_basis(data, Basis.parse(args.basis))
    print(f"{model.description}: rss={model.rss:.6g} sigma2={model.sigma2:.6g}")
    if args.output:
        payload = model.to_json()
        if args.with_precision:
            payload["precision_curve"] = precision_curve(model).curve.to_json()
        try:
            with open(args.output, "w") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            print(f"cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_UNWRITABLE
    return EXIT_OK


def cmd_similarity(args) -> int:
    store = _store(args)
    scenario = store.get(args.scenario)
    for name in (args.est1, args.est2):
        if name not in scenario.estimates:
            raise SpecValidationError([f"unknown estimate {name!r}"])
    spec = _spec_from_args(args)
    values = similarity(
        spec, scenario.estimates[args.est1], scenario.estimates[args.est2],
        scenario.distribution,
    )
    print(" ".join(_format(v) for v in values))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store=_store(args), frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_scenarios(args) -> int:
    store = _store(args)
    if args.action == "list":
        for name in store.names():
            scenario = store.get(name)
            print(f"{name}\t{scenario.title}\t{len(scenario.estimates)} estimates")
        return EXIT_OK
    raise SpecValidationError([f"unknown scenarios action {args.action!r}"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvemetrics",
        description="Evaluate curve estimates against a ground truth.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="run one measure for one estimate")
    p.add_argument("--scenario", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--scenario-dir")
    _add_spec_arguments(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("panel", help="run a measure list over all estimates")
    p.add_argument("--scenario", required=True)
    p.add_argument("--scenario-dir")
    p.add_argument("--measures", help="JSON file with a list of measure specs; default: bundled panel")
    p.add_argument("--output", help="output path; '-' or omitted for stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_panel)

    p = sub.add_parser("fit", help="fit a dataset and report the model")
    p.add_argument("--data", required=True, help="CSV file with header x,y")
    p.add_argument("--basis", required=True,
                   help="linear | polynomial:D | bspline:D:N | fracpoly:1 | fracpoly:2")
    p.add_argument("--output", help="write the fitted model as JSON")
    p.add_argument("--with-precision", action="store_true",
                   help="include the precision curve in the JSON output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("similarity", help="apply a measure to two estimates")
    p.add_argument("--scenario", required=True)
    p.add_argument("--est1", required=True)
    p.add_argument("--est2", required=True)
    p.add_argument("--scenario-dir")
    _add_spec_arguments(p)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--scenario-dir")
    p.add_argument("--frontend", help="serve a built frontend from this directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("scenarios", help="inspect the scenario store")
    p.add_argument("action", choices=["list"])
    p.add_argument("--scenario-dir")
    p.set_defaults(func=cmd_scenarios)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateScopeError as exc:
        print(f"degenerate scope: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SpecValidationError, SingularFitError, DomainError, KeyError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"invalid request: {message}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CurveMetricsError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
