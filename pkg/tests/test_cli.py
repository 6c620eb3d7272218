"""Command-line interface tests: exit codes, output formatting and
idempotent panel files."""

import json

import numpy as np
import pytest

from curvemetrics import Curve
from curvemetrics.cli import main
from curvemetrics.distributions import PredictorDistribution
from curvemetrics.study import Scenario, ScenarioStore


@pytest.fixture()
def custom_dir(tmp_path):
    truth = Curve.from_polynomial((0, 1), [0.0, 1.0])
    scenario = Scenario(
        name="offsets", title="offsets", truth=truth,
        estimates={"T": truth.shifted(0.0), "U": truth.shifted(0.2),
                   "V": truth.shifted(0.3)},
        distribution=PredictorDistribution.beta_on((0, 1), 1, 1),
    )
    ScenarioStore(directory=tmp_path).save(scenario)
    return tmp_path


def test_evaluate_identity_prints_zero(custom_dir, capsys):
    rc = main([
        "evaluate", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--estimate", "T", "--loss", "absolute",
    ])
    assert rc == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(0.0, abs=1e-9)


def test_evaluate_offset_value(custom_dir, capsys):
    rc = main([
        "evaluate", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--estimate", "V", "--loss", "squared",
    ])
    assert rc == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(0.09, abs=1e-9)


def test_missing_q_exits_2(custom_dir, capsys):
    rc = main([
        "evaluate", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--estimate", "T", "--aggregation", "quantile_Fx",
    ])
    assert rc == 2
    assert "q" in capsys.readouterr().err


def test_x_star_outside_domain_exits_2(custom_dir, capsys):
    rc = main([
        "evaluate", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--estimate", "T", "--localization", "point", "--x-star", "1.5",
    ])
    assert rc == 2


def test_degenerate_scope_exits_3(custom_dir, capsys):
    rc = main([
        "evaluate", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--estimate", "T", "--scope", "interval:2:3",
    ])
    assert rc == 3
    assert "scope" in capsys.readouterr().err


def test_unknown_scenario_exits_2(capsys):
    rc = main(["evaluate", "--scenario", "missing", "--estimate", "A"])
    assert rc == 2


def test_panel_idempotent_bytes(tmp_path, capsys):
    out1 = tmp_path / "panel1.csv"
    out2 = tmp_path / "panel2.csv"
    for out in (out1, out2):
        rc = main(["panel", "--scenario", "asymptote", "--output", str(out)])
        assert rc == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2
    lines = b1.decode().splitlines()
    assert len(lines) == 6  # header + five estimates
    assert "inf" in b1.decode()


def test_panel_json_format(tmp_path):
    out = tmp_path / "panel.json"
    rc = main(["panel", "--scenario", "sigmoid", "--format", "json",
               "--output", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["scenario"] == "sigmoid"
    assert len(payload["measures"]) == 11
    assert len(payload["cells"]) == 5


def test_panel_empty_measures_exits_2(tmp_path, capsys):
    measures = tmp_path / "measures.json"
    measures.write_text("[]")
    rc = main(["panel", "--scenario", "sigmoid", "--measures", str(measures),
               "--output", str(tmp_path / "x.csv")])
    assert rc == 2


def test_panel_custom_measures(tmp_path, capsys):
    measures = tmp_path / "measures.json"
    measures.write_text(json.dumps([{
        "localization": "range", "characteristic": "function",
        "loss": "absolute", "axis": "Y", "aggregation": "max",
    }]))
    rc = main(["panel", "--scenario", "sigmoid", "--measures", str(measures)])
    assert rc == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert "max" in header


def test_panel_unwritable_exits_4(capsys):
    rc = main(["panel", "--scenario", "sigmoid",
               "--output", "/nonexistent-dir/panel.csv"])
    assert rc == 4


def test_fit_linear_and_json(tmp_path, capsys):
    data = tmp_path / "data.csv"
    xs = np.linspace(0, 1, 21)
    rows = "\n".join(f"{x},{1 + 2 * x}" for x in xs)
    data.write_text(f"x,y\n{rows}\n")
    out = tmp_path / "model.json"
    rc = main(["fit", "--data", str(data), "--basis", "linear",
               "--output", str(out)])
    assert rc == 0
    assert "linear" in capsys.readouterr().out
    payload = json.loads(out.read_text())
    assert payload["coefficients"] == pytest.approx([1.0, 2.0], abs=1e-8)


def test_fit_fracpoly(tmp_path, capsys):
    data = tmp_path / "data.csv"
    xs = np.linspace(0.01, 1, 40)
    rows = "\n".join(f"{x},{x**2}" for x in xs)
    data.write_text(f"x,y\n{rows}\n")
    rc = main(["fit", "--data", str(data), "--basis", "fracpoly:1"])
    assert rc == 0
    assert "powers=(2)" in capsys.readouterr().out


def test_fit_bad_basis_exits_2(tmp_path, capsys):
    data = tmp_path / "data.csv"
    data.write_text("x,y\n0,0\n1,1\n")
    rc = main(["fit", "--data", str(data), "--basis", "wavelet:3"])
    assert rc == 2


def test_similarity_cli(custom_dir, capsys):
    rc = main([
        "similarity", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--est1", "U", "--est2", "T", "--loss", "difference",
    ])
    assert rc == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(0.2, abs=1e-9)


def test_similarity_pair_output(custom_dir, capsys):
    rc = main([
        "similarity", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--est1", "U", "--est2", "T", "--loss", "difference",
        "--aggregation", "max",
    ])
    assert rc == 0
    parts = capsys.readouterr().out.split()
    assert len(parts) == 2
    assert float(parts[0]) == pytest.approx(0.2, abs=1e-9)
    assert float(parts[1]) == pytest.approx(0.2, abs=1e-9)


def test_scenarios_list(capsys):
    rc = main(["scenarios", "list"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("sigmoid")


def test_spec_file_with_flag_override(custom_dir, tmp_path, capsys):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps({
        "localization": "range", "characteristic": "function",
        "loss": "absolute", "axis": "Y", "aggregation": "integral_dx",
    }))
    rc = main([
        "evaluate", "--scenario", "offsets", "--scenario-dir", str(custom_dir),
        "--estimate", "V", "--spec", str(spec_file), "--loss", "squared",
    ])
    assert rc == 0
    assert float(capsys.readouterr().out.strip()) == pytest.approx(0.09, abs=1e-9)
