"""Predictor distributions over a bounded interval.

Two kinds are supported: a Beta(alpha, beta) law affinely mapped onto the
domain [a, b] (density rescaled by 1/(b-a)), and an empirical sample
(step ECDF).  The regularized incomplete beta function is evaluated with a
continued fraction (modified Lentz scheme), switching to the symmetric
expansion at x = (alpha+1)/(alpha+beta+2); quantiles use a safeguarded
Newton iteration that falls back to bisection whenever a step leaves the
current bracket.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, lgamma, log, log1p

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateScopeError, DomainError, UnsupportedOperationError

__all__ = ["PredictorDistribution", "regularized_incomplete_beta", "truncated_prob_grid"]

FloatArray = NDArray[np.float64]

#: Quantile solver stops when |cdf(x) - p| drops below this.
QUANTILE_TOL = 1e-10

_CF_MAX_ITER = 300
_CF_TOL = 3e-16
_CF_TINY = 1e-300


def _log_beta(a: float, b: float) -> float:
    return lgamma(a) + lgamma(b) - lgamma(a + b)


def _contfrac_beta(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta integral, evaluated with
    the modified Lentz scheme.

    :param float a: first shape parameter
    :param float b: second shape parameter
    :param float x: evaluation point, required x < (a+1)/(a+b+2)
    :returns float: value of the continued fraction
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) on the unit interval."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    # x^a (1-x)^b / B(a,b); the prefactor is symmetric under (a,b,x) -> (b,a,1-x)
    front = exp(a * log(x) + b * log1p(-x) - _log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _contfrac_beta(a, b, x) / a
    return 1.0 - front * _contfrac_beta(b, a, 1.0 - x) / b


def _beta_pdf01(a: float, b: float, x) -> FloatArray:
    """Beta density on the unit interval, vectorized, 0 outside (0, 1)."""
    xs = np.asarray(x, dtype=float)
    out = np.zeros_like(xs)
    inside = (xs > 0.0) & (xs < 1.0)
    xi = xs[inside]
    with np.errstate(divide="ignore"):
        out[inside] = np.exp(
            (a - 1.0) * np.log(xi) + (b - 1.0) * np.log1p(-xi) - _log_beta(a, b)
        )
    # density at the exact endpoints: finite only when the exponent vanishes
    if a == 1.0:
        out[xs == 0.0] = np.exp(-_log_beta(a, b))
    if b == 1.0:
        out[xs == 1.0] = np.exp(-_log_beta(a, b))
    return out


def _beta_quantile01(a: float, b: float, p: float) -> float:
    """Quantile of Beta(a, b) on the unit interval.

    Safeguarded Newton: keep a bracket [lo, hi] around the root, propose a
    Newton step from the density, and bisect whenever the proposal leaves
    the bracket or the density vanishes.
    """
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    x = a / (a + b)  # mean as the starting point
    for _ in range(200):
        f = regularized_incomplete_beta(a, b, x) - p
        if abs(f) <= QUANTILE_TOL:
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        dens = float(_beta_pdf01(a, b, x))
        nxt = x - f / dens if dens > 0.0 else -1.0
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        x = nxt
    return x


@dataclass(frozen=True, eq=False)
class PredictorDistribution:
    """Distribution of the predictor over a closed interval [a, b].

    :param str kind: "beta" or "empirical"
    :param tuple domain: closed interval (a, b) with a < b
    :param float alpha: Beta shape parameter (beta kind only)
    :param float beta: Beta shape parameter (beta kind only)
    :param values: sample values within the domain (empirical kind only)
    """

    kind: str
    domain: tuple[float, float]
    alpha: float | None = None
    beta: float | None = None
    values: FloatArray | None = None

    def __post_init__(self) -> None:
        lo, hi = float(self.domain[0]), float(self.domain[1])
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError("domain must be a finite interval with a < b")
        object.__setattr__(self, "domain", (lo, hi))
        if self.kind == "beta":
            if self.alpha is None or self.beta is None or self.alpha <= 0 or self.beta <= 0:
                raise ValueError("beta kind needs alpha > 0 and beta > 0")
        elif self.kind == "empirical":
            if self.values is None or len(self.values) == 0:
                raise ValueError("empirical kind needs at least one sample value")
            vals = np.sort(np.asarray(self.values, dtype=float))
            if vals[0] < lo or vals[-1] > hi:
                raise ValueError("sample values must lie within the domain")
            object.__setattr__(self, "values", vals)
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "_grid_cache", {})

    @staticmethod
    def beta_on(domain: tuple[float, float], alpha: float, beta: float) -> "PredictorDistribution":
        return PredictorDistribution("beta", domain, alpha=alpha, beta=beta)

    @staticmethod
    def empirical(values, domain: tuple[float, float] | None = None) -> "PredictorDistribution":
        vals = np.sort(np.asarray(values, dtype=float))
        if domain is None:
            if vals[0] == vals[-1]:
                raise ValueError("degenerate sample needs an explicit domain")
            domain = (float(vals[0]), float(vals[-1]))
        return PredictorDistribution("empirical", domain, values=vals)

    def _to_unit(self, x):
        lo, hi = self.domain
        return (np.asarray(x, dtype=float) - lo) / (hi - lo)

    def pdf(self, x):
        """Density at scalar or array x.  Undefined for the empirical kind."""
        if self.kind != "beta":
            raise UnsupportedOperationError("pdf is not defined for an empirical distribution")
        lo, hi = self.domain
        xs = np.asarray(x, dtype=float)
        if np.any(xs < lo) or np.any(xs > hi):
            raise DomainError(f"pdf argument outside domain [{lo}, {hi}]")
        out = _beta_pdf01(self.alpha, self.beta, self._to_unit(xs)) / (hi - lo)
        return float(out) if np.ndim(x) == 0 else out

    def cdf(self, x):
        """Distribution function at scalar or array x."""
        lo, hi = self.domain
        xs = np.asarray(x, dtype=float)
        if np.any(xs < lo - 1e-12 * (hi - lo)) or np.any(xs > hi + 1e-12 * (hi - lo)):
            raise DomainError(f"cdf argument outside domain [{lo}, {hi}]")
        if self.kind == "beta":
            unit = np.clip(self._to_unit(xs), 0.0, 1.0)
            flat = np.atleast_1d(unit)
            out = np.array([regularized_incomplete_beta(self.alpha, self.beta, u) for u in flat])
            out = out.reshape(np.shape(unit))
        else:
            out = np.searchsorted(self.values, xs, side="right") / self.values.size
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, p):
        """Smallest x with cdf(x) >= p, for p in [0, 1]."""
        ps = np.asarray(p, dtype=float)
        if np.any(ps < 0.0) or np.any(ps > 1.0):
            raise ValueError("probability must lie in [0, 1]")
        lo, hi = self.domain
        if self.kind == "beta":
            flat = np.atleast_1d(ps)
            out = np.array([lo + (hi - lo) * _beta_quantile01(self.alpha, self.beta, q) for q in flat])
            out = out.reshape(np.shape(ps))
        else:
            n = self.values.size
            flat = np.atleast_1d(ps)
            idx = np.ceil(flat * n).astype(int) - 1
            out = np.where(flat <= 0.0, lo, self.values[np.clip(idx, 0, n - 1)])
            out = out.reshape(np.shape(ps))
        return float(out) if np.ndim(p) == 0 else out

    def mass(self, lo: float, hi: float) -> float:
        """Probability of the interval [lo, hi]."""
        return float(self.cdf(hi) - self.cdf(lo))

    def to_json(self) -> dict:
        if self.kind == "beta":
            return {
                "kind": "beta",
                "alpha": self.alpha,
                "beta": self.beta,
                "domain": [self.domain[0], self.domain[1]],
            }
        return {
            "kind": "empirical",
            "values": self.values.tolist(),
            "domain": [self.domain[0], self.domain[1]],
        }

    @staticmethod
    def from_json(obj: dict) -> "PredictorDistribution":
        kind = obj.get("kind")
        if kind == "beta":
            return PredictorDistribution.beta_on(
                tuple(obj.get("domain", (0.0, 1.0))), float(obj["alpha"]), float(obj["beta"])
            )
        if kind == "empirical":
            domain = tuple(obj["domain"]) if "domain" in obj else None
            return PredictorDistribution.empirical(obj["values"], domain)
        raise ValueError(f"unknown distribution kind {kind!r}")


def truncated_prob_grid(d: PredictorDistribution, scope: tuple[float, float], n: int) -> FloatArray:
    """Deterministic probability-spaced grid on the scope interval.

    Returns x_k = quantile(cdf(lo) + m * (k - 0.5) / n) for k = 1..n with
    m the probability mass of the scope.  Applying cdf to the result maps
    it back to an arithmetic progression (continuous kinds), so empirical
    quantiles of losses over this grid estimate quantiles of the loss under
    the truncated distribution without any sampling.
    """
    lo, hi = float(scope[0]), float(scope[1])
    if not lo < hi:
        raise DegenerateScopeError(f"scope [{lo}, {hi}] has no interior")
    if n < 1:
        raise ValueError("grid size must be positive")
    cache = getattr(d, "_grid_cache")
    key = (lo, hi, int(n))
    if key in cache:
        return cache[key]
    plo = d.cdf(lo)
    mass = d.cdf(hi) - plo
    if mass <= 0.0:
        raise DegenerateScopeError(f"scope [{lo}, {hi}] carries no probability mass")
    ks = np.arange(1, n + 1)
    xs = d.quantile(plo + mass * (ks - 0.5) / n)
    cache[key] = xs
    return xs
