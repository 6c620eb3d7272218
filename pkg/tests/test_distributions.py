"""Distribution tests: continued-fraction incomplete beta and the quantile
solver are checked against scipy.special and a standalone bisection oracle
on the closed-form Beta(2,2) distribution function 3x^2 - 2x^3."""

import json

import numpy as np
import pytest
from scipy import special

from curvemetrics import DomainError, UnsupportedOperationError
from curvemetrics.distributions import (
    PredictorDistribution,
    regularized_incomplete_beta,
    truncated_prob_grid,
)
from curvemetrics.errors import DegenerateScopeError


def beta22_cdf_closed_form(x):
    return 3 * x**2 - 2 * x**3


def bisect_quantile(cdf, p, lo=0.0, hi=1.0, tol=1e-13):
    """Plain interval bisection, independent of the package solver."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_pdf_frozen_value_mapped_domain():
    d = PredictorDistribution.beta_on((0, 2), 2, 2)
    assert d.pdf(1.0) == pytest.approx(0.75, abs=1e-12)


def test_cdf_frozen_value():
    d = PredictorDistribution.beta_on((0, 1), 2, 2)
    assert d.cdf(0.5) == pytest.approx(0.5, abs=1e-12)
    xs = np.linspace(0, 1, 41)
    np.testing.assert_allclose(d.cdf(xs), beta22_cdf_closed_form(xs), atol=1e-12)


def test_incomplete_beta_matches_scipy():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a = float(rng.uniform(0.3, 8.0))
        b = float(rng.uniform(0.3, 8.0))
        x = float(rng.uniform(0.0, 1.0))
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(
            float(special.betainc(a, b, x)), abs=1e-12
        )


def test_quantile_against_bisection_oracle():
    d = PredictorDistribution.beta_on((0, 1), 2, 2)
    for p in (0.05, 0.25, 0.5, 0.75, 0.95):
        ref = bisect_quantile(beta22_cdf_closed_form, p)
        assert d.quantile(p) == pytest.approx(ref, abs=1e-8)


def test_quantile_against_scipy():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = float(rng.uniform(0.5, 6.0))
        b = float(rng.uniform(0.5, 6.0))
        p = float(rng.uniform(0.001, 0.999))
        d = PredictorDistribution.beta_on((0, 1), a, b)
        assert d.quantile(p) == pytest.approx(float(special.betaincinv(a, b, p)), abs=1e-9)


def test_quantile_endpoints():
    d = PredictorDistribution.beta_on((1, 3), 2, 5)
    assert d.quantile(0.0) == 1.0
    assert d.quantile(1.0) == 3.0


def test_cdf_monotone_and_bounds():
    d = PredictorDistribution.beta_on((0, 1), 2, 5)
    xs = np.linspace(0, 1, 101)
    cs = d.cdf(xs)
    assert cs[0] == 0.0
    assert cs[-1] == 1.0
    assert np.all(np.diff(cs) >= 0)


def test_quantile_inverts_cdf():
    d = PredictorDistribution.beta_on((0, 1), 5, 2)
    for x in (0.2, 0.4, 0.6, 0.8):
        assert d.quantile(d.cdf(x)) == pytest.approx(x, abs=1e-9)


def test_pdf_integrates_to_one():
    for a, b in ((2, 2), (2, 5), (5, 2)):
        d = PredictorDistribution.beta_on((0, 1), a, b)
        n = 50001
        mid = (np.arange(n) + 0.5) / n
        total = np.sum(d.pdf(mid)) / n
        assert total == pytest.approx(1.0, abs=1e-6)


def test_affine_mapping():
    d = PredictorDistribution.beta_on((1, 3), 2, 5)
    assert d.cdf(2.0) == pytest.approx(float(special.betainc(2, 5, 0.5)), abs=1e-12)
    assert d.quantile(0.3) == pytest.approx(1 + 2 * float(special.betaincinv(2, 5, 0.3)), abs=1e-9)
    # density rescaled by interval length: 30 x (1-x)^4 at unit 0.5, over length 2
    assert d.pdf(2.0) == pytest.approx(30 * 0.5 * 0.5**4 / 2, abs=1e-12)


def test_empirical_cdf_and_quantile():
    d = PredictorDistribution.empirical([0.1, 0.2, 0.3])
    assert d.cdf(0.2) == pytest.approx(2 / 3, abs=1e-15)
    assert d.quantile(0.5) == pytest.approx(0.2)
    assert d.quantile(0.0) == pytest.approx(0.1)  # domain start
    assert d.quantile(1.0) == pytest.approx(0.3)
    with pytest.raises(UnsupportedOperationError):
        d.pdf(0.2)


def test_domain_checks():
    d = PredictorDistribution.beta_on((0, 1), 2, 2)
    with pytest.raises(DomainError):
        d.pdf(1.5)
    with pytest.raises(DomainError):
        d.cdf(-0.5)
    with pytest.raises(ValueError):
        d.quantile(1.5)


def test_truncated_grid_equidistributed():
    d = PredictorDistribution.beta_on((0, 1), 2, 2)
    for scope in ((0.0, 1.0), (0.2, 0.7)):
        xs = truncated_prob_grid(d, scope, 200)
        ps = d.cdf(xs)
        plo = d.cdf(scope[0])
        mass = d.cdf(scope[1]) - plo
        expected = plo + mass * (np.arange(1, 201) - 0.5) / 200
        np.testing.assert_allclose(ps, expected, atol=1e-9)
        assert np.all(xs >= scope[0]) and np.all(xs <= scope[1])


def test_truncated_grid_deterministic_and_cached():
    d = PredictorDistribution.beta_on((0, 1), 2, 5)
    a = truncated_prob_grid(d, (0.1, 0.9), 64)
    b = truncated_prob_grid(d, (0.1, 0.9), 64)
    assert a is b  # cache hit
    d2 = PredictorDistribution.beta_on((0, 1), 2, 5)
    np.testing.assert_array_equal(a, truncated_prob_grid(d2, (0.1, 0.9), 64))


def test_truncated_grid_empirical():
    d = PredictorDistribution.empirical(np.linspace(0.05, 0.95, 19))
    xs = truncated_prob_grid(d, (0.05, 0.95), 10)
    assert xs.shape == (10,)
    assert np.all((xs >= 0.05) & (xs <= 0.95))
    with pytest.raises(DegenerateScopeError):
        truncated_prob_grid(d, (0.5, 0.5), 10)


def test_json_round_trip():
    d = PredictorDistribution.beta_on((0, 2), 2, 5)
    d2 = PredictorDistribution.from_json(json.loads(json.dumps(d.to_json())))
    assert d2.kind == "beta" and d2.alpha == 2 and d2.beta == 5 and d2.domain == (0.0, 2.0)
    e = PredictorDistribution.empirical([0.3, 0.1, 0.2])
    e2 = PredictorDistribution.from_json(json.loads(json.dumps(e.to_json())))
    np.testing.assert_array_equal(e2.values, [0.1, 0.2, 0.3])
