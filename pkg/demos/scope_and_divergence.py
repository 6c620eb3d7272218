"""Show how measure scope and predictor distribution decide divergence.

Run from the repository root:

    python3 demos/scope_and_divergence.py
"""

from curvemetrics.distributions import PredictorDistribution
from curvemetrics.measures import MeasureSpec, Scope, evaluate, resolve_scope
from curvemetrics.study import ScenarioStore

scenario = ScenarioStore().get("asymptote")
truth, steep = scenario.truth, scenario.estimates["D"]

uniform = PredictorDistribution.beta_on((0.0, 1.0), 1, 1)
beta22 = PredictorDistribution.beta_on((0.0, 1.0), 2, 2)

# The squared slope error of a square-root-shaped estimate integrates
# like 1/x near zero: divergent when the predictor density stays flat,
# finite when Beta(2, 2) mass vanishes at the edges.
spec = MeasureSpec("range", "first_derivative", "squared", axis="Y",
                   aggregation="expectation_dFx", scope=Scope.full())
for name, d in (("uniform", uniform), ("Beta(2,2)", beta22)):
    out = evaluate(spec, truth, steep, d)
    print(f"E[(f_hat' - f')^2] under {name:10s}: {out.to_json_value()}"
          f"  (divergent={out.divergent}, bad samples={out.n_nonfinite})")

# The absolute version of the same comparison integrates like 1/sqrt(x)
# and stays finite even under the flat density.
print("absolute version under uniform   :",
      evaluate(spec.replace(loss="absolute"), truth, steep, uniform).to_json_value())

# Curvature error over the whole range diverges for any distribution
# (plain dx integral), but restricting to the central 90% of predictor
# mass keeps the scan away from the singular edge.
curvature = MeasureSpec("range", "second_derivative", "absolute", axis="Y",
                        aggregation="integral_dx", scope=Scope.full())
banded = curvature.replace(scope=Scope.quantile_band(0.05, 0.95))
lo, hi = resolve_scope(banded, scenario.distribution)
print(f"\nint |f_hat'' - f''| dx, full range : "
      f"{evaluate(curvature, truth, steep, scenario.distribution).to_json_value()}")
print(f"int |f_hat'' - f''| dx, [{lo:.4f}, {hi:.4f}]: "
      f"{evaluate(banded, truth, steep, scenario.distribution).value:.4f}")

print("\nsame curves, same losses; scope and density choose the verdict")
