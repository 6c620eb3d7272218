"""Rank five estimates of a saturating curve on the bundled measure panel.

Run from the repository root:

    python3 demos/compare_estimates.py
"""

import numpy as np

from curvemetrics.study import ScenarioStore, evaluate_panel, standard_panel

store = ScenarioStore()
print("bundled scenarios:", ", ".join(store.names()))

# The asymptote scenario bundles a truth curve, five estimates labelled
# A..E and a predictor distribution. Estimate D is a square-root-shaped
# curve whose derivative blows up near the left edge.
scenario = store.get("asymptote")
print(f"\nscenario: {scenario.name} ({scenario.title})")
print("estimates:", ", ".join(scenario.estimates))

# Every estimate gets every measure; each column is ranked by the
# direction the measure prefers (smaller, larger, smaller magnitude).
table = evaluate_panel(scenario, standard_panel())
print("\n" + table.to_csv())

# Divergent cells carry rank last. Pull D's row to see where the
# unbounded derivative shows up and where a quantile band hides it.
row = table.cells[table.estimates.index("D")]
for spec, cell in zip(table.measures, row):
    tag = "divergent" if cell.value.divergent else f"{cell.value.value:.6g}"
    print(f"  D | {spec.label():55s} -> {tag:>10s}  rank {cell.rank}")

# Sanity: each column's finite ranks start at 1.
best = [min(c.rank for c in col if c.rank is not None)
        for col in np.array(table.cells, dtype=object).T]
assert all(r == 1 for r in best)
print("\nevery measure column has a rank-1 winner")
