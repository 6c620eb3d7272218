"""HTTP service tests: endpoint contracts, error shapes, cross-endpoint
consistency of quantile guides, and distribution switching."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from curvemetrics import Curve
from curvemetrics.distributions import PredictorDistribution
from curvemetrics.service import create_app
from curvemetrics.study import Scenario, ScenarioStore


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def abs_integral_spec(**kw):
    return {
        "localization": "range", "characteristic": "function", "loss": "absolute",
        "axis": "Y", "aggregation": "integral_dx", "scope": {"kind": "full"}, **kw,
    }


def test_list_scenarios(client):
    body = client.get("/scenarios").json()
    names = [s["name"] for s in body["scenarios"]]
    assert names == ["sigmoid", "unimodal", "asymptote", "rebound"]
    assert all(len(s["estimates"]) == 5 for s in body["scenarios"])


def test_scenario_detail(client):
    body = client.get("/scenarios/sigmoid").json()
    assert len(body["truth"]["x"]) == 512
    assert set(body["estimates"]) == set("ABCDE")
    dist = body["distribution"]
    assert dist["kind"] == "beta" and dist["alpha"] == 2 and dist["beta"] == 2
    assert 0 < dist["q05"] < dist["q95"] < 1
    assert len(dist["density"]["x"]) == 257
    options = body["distribution_options"]
    assert set(options) == {"beta_2_2", "beta_2_5", "beta_5_2"}
    # a right-skewed density has earlier quantiles
    assert options["beta_2_5"]["q95"] < options["beta_2_2"]["q95"]


def test_unknown_scenario_404(client):
    resp = client.get("/scenarios/nope")
    assert resp.status_code == 404
    body = resp.json()
    assert body["code"] == "not_found" and body["field"] == "scenario"


def test_evaluate_constant_offset(client):
    resp = client.post("/evaluate", json={
        "scenario": "unimodal", "estimate": "D", "spec": abs_integral_spec(),
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["value"] == pytest.approx(0.15, abs=1e-6)
    assert body["divergent"] is False


def test_evaluate_divergent_contract(client):
    spec = abs_integral_spec(characteristic="first_derivative", loss="squared",
                             aggregation="expectation_dFx")
    resp = client.post("/evaluate", json={
        "scenario": "asymptote", "estimate": "D", "spec": spec,
    })
    body = resp.json()
    assert body["value"] == "inf" and body["divergent"] is True


def test_evaluate_validation_400(client):
    spec = abs_integral_spec(aggregation="quantile_Fx")  # missing q
    resp = client.post("/evaluate", json={
        "scenario": "sigmoid", "estimate": "A", "spec": spec,
    })
    assert resp.status_code == 400
    body = resp.json()
    assert body["code"] == "validation_error" and body["field"] == "q"


def test_evaluate_unknown_names_404(client):
    resp = client.post("/evaluate", json={
        "scenario": "nope", "estimate": "A", "spec": abs_integral_spec(),
    })
    assert resp.status_code == 404
    resp = client.post("/evaluate", json={
        "scenario": "sigmoid", "estimate": "Z", "spec": abs_integral_spec(),
    })
    assert resp.status_code == 404 and resp.json()["field"] == "estimate"


def test_degenerate_scope_422(client):
    spec = abs_integral_spec(scope={"kind": "interval", "lo": 2.0, "hi": 3.0})
    resp = client.post("/evaluate", json={
        "scenario": "sigmoid", "estimate": "A", "spec": spec,
    })
    assert resp.status_code == 422
    assert resp.json()["code"] == "degenerate_scope"


def test_malformed_body_400(client):
    resp = client.post("/evaluate", json={"scenario": "sigmoid", "estimate": "A",
                                          "spec": "absolute"})
    assert resp.status_code == 400


def test_panel_ranks_are_permutation(client):
    resp = client.post("/panel", json={"scenario": "sigmoid", "spec": abs_integral_spec()})
    assert resp.status_code == 200
    body = resp.json()
    assert body["measure"]["direction"] == "smaller"
    assert body["scope"] == [0.0, 1.0]
    ranks = sorted(r["rank"] for r in body["results"])
    assert ranks == [1, 2, 3, 4, 5]


def test_panel_scope_echo_matches_distribution(client):
    detail = client.get("/scenarios/sigmoid").json()
    spec = abs_integral_spec(scope={"kind": "quantile_band", "l": 0.05, "u": 0.95})
    resp = client.post("/panel", json={"scenario": "sigmoid", "spec": spec}).json()
    assert resp["scope"][0] == pytest.approx(detail["distribution"]["q05"], abs=1e-9)
    assert resp["scope"][1] == pytest.approx(detail["distribution"]["q95"], abs=1e-9)
    shifted = client.post("/panel", json={
        "scenario": "sigmoid", "spec": spec, "distribution": "beta_2_5",
    }).json()
    assert shifted["scope"][0] < resp["scope"][0]
    assert shifted["scope"][1] < resp["scope"][1]


def test_panel_distribution_switch_changes_values(client):
    spec = abs_integral_spec(aggregation="expectation_dFx")
    base = client.post("/panel", json={"scenario": "sigmoid", "spec": spec}).json()
    other = client.post("/panel", json={
        "scenario": "sigmoid", "spec": spec, "distribution": "beta_5_2",
    }).json()
    values = {r["estimate"]: r["value"] for r in base["results"]}
    shifted = {r["estimate"]: r["value"] for r in other["results"]}
    assert any(abs(values[k] - shifted[k]) > 1e-6 for k in values)
    bad = client.post("/panel", json={
        "scenario": "sigmoid", "spec": spec, "distribution": "beta_9_9",
    })
    assert bad.status_code == 400 and bad.json()["field"] == "distribution"


def test_measures_schema(client):
    body = client.get("/measures/schema").json()
    assert body["localization"] == ["range", "point"]
    assert len(body["aggregation"]["Y"]) == 6
    assert len(body["aggregation"]["X"]) == 3
    assert "beta_2_5" in body["distributions"]
    assert body["rules"]["quantile_Fx"]["requires"] == ["q"]


def test_custom_store(tmp_path):
    truth = Curve.from_polynomial((0, 1), [0.0, 1.0])
    scenario = Scenario(
        name="custom", title="custom", truth=truth,
        estimates={"T": truth.shifted(0.0), "U": truth.shifted(0.25)},
        distribution=PredictorDistribution.beta_on((0, 1), 1, 1),
    )
    store = ScenarioStore(directory=tmp_path)
    store.save(scenario)
    client = TestClient(create_app(store=store))
    names = [s["name"] for s in client.get("/scenarios").json()["scenarios"]]
    assert "custom" in names
    body = client.post("/evaluate", json={
        "scenario": "custom", "estimate": "T", "spec": abs_integral_spec(),
    }).json()
    assert body["value"] == pytest.approx(0.0, abs=1e-9)


def test_identical_requests_identical_responses(client):
    payload = {"scenario": "asymptote", "spec": abs_integral_spec(
        characteristic="second_derivative")}
    a = client.post("/panel", json=payload).content
    b = client.post("/panel", json=payload).content
    assert a == b
