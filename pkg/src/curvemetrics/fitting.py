"""Least-squares estimation of curves from (x, y) observations.

Supported bases: straight line, raw polynomial, B-splines with interior
knots at sample quantiles, and fractional polynomials of degree 1 or 2
selected by residual sum of squares.  Every fit carries its coefficient
covariance so the pointwise precision 1 / (B(x) Cov B(x)') can be turned
into a curve of its own.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline, PPoly

from .curves import MAX_DEGREE, Curve, from_samples
from .errors import CurveMetricsError, SingularFitError, SpecValidationError

__all__ = [
    "Dataset",
    "Basis",
    "FittedModel",
    "PrecisionCurve",
    "fit_basis",
    "fit_fractional_polynomial",
    "precision_curve",
    "FP_POWERS",
]

#: Candidate exponents for fractional polynomials; 0 stands for log x.
FP_POWERS = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0)

# rank cut for the least-squares solve, relative to the leading singular value
RANK_RCOND = 1e-10

# p-hat values above this are reported as capped rather than infinite
PRECISION_CAP = 1e12

DENSE_SAMPLES = 512


@dataclass(frozen=True)
class Dataset:
    """Observations (x_i, y_i) used to fit a curve."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        problems = []
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
            problems.append("x and y must be one-dimensional and equally long")
        elif x.size < 2:
            problems.append("need at least two observations")
        else:
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                problems.append("observations must be finite")
            elif np.ptp(x) == 0.0:
                problems.append("x values must not all be equal")
        if problems:
            raise SpecValidationError(problems)

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x.min()), float(self.x.max())

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        """Read a two-column CSV with header row naming columns x and y."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise SpecValidationError(["empty CSV file"])
        header = [h.strip() for h in rows[0]]
        if "x" not in header or "y" not in header:
            raise SpecValidationError(["CSV header must name columns x and y"])
        ix, iy = header.index("x"), header.index("y")
        try:
            xs = [float(r[ix]) for r in rows[1:] if r]
            ys = [float(r[iy]) for r in rows[1:] if r]
        except (ValueError, IndexError) as exc:
            raise SpecValidationError([f"malformed CSV row: {exc}"]) from exc
        return cls(np.array(xs), np.array(ys))


@dataclass(frozen=True)
class Basis:
    """Requested basis: kind plus the parameters that pin it down."""

    kind: str
    degree: int = 1
    n_basis: int = 0

    def __post_init__(self) -> None:
        problems = []
        if self.kind == "linear":
            pass
        elif self.kind == "polynomial":
            if not 0 <= self.degree <= MAX_DEGREE:
                problems.append(f"polynomial degree must be in 0..{MAX_DEGREE}")
        elif self.kind == "bspline":
            if not 1 <= self.degree <= MAX_DEGREE:
                problems.append(f"bspline degree must be in 1..{MAX_DEGREE}")
            if self.n_basis < self.degree + 1:
                problems.append("bspline needs n_basis >= degree + 1")
        else:
            problems.append(f"unknown basis kind {self.kind!r}")
        if problems:
            raise SpecValidationError(problems)

    @property
    def size(self) -> int:
        if self.kind == "linear":
            return 2
        if self.kind == "polynomial":
            return self.degree + 1
        return self.n_basis

    @classmethod
    def parse(cls, text: str) -> "Basis":
        """Parse "linear", "polynomial:D" or "bspline:D:N"."""
        parts = text.strip().split(":")
        kind = parts[0]
        try:
            if kind == "linear" and len(parts) == 1:
                return cls("linear")
            if kind == "polynomial" and len(parts) == 2:
                return cls("polynomial", degree=int(parts[1]))
            if kind == "bspline" and len(parts) == 3:
                return cls("bspline", degree=int(parts[1]), n_basis=int(parts[2]))
        except ValueError:
            pass
        raise SpecValidationError([f"cannot parse basis {text!r}"])


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Least-squares fit: coefficients, their covariance and the induced curve."""

    kind: str
    degree: int
    coefficients: np.ndarray
    covariance: np.ndarray
    sigma2: float
    rss: float
    n_obs: int
    curve: Curve
    knots: tuple = ()    # full B-spline knot vector when kind == "bspline"
    powers: tuple = ()   # selected exponents when kind == "fracpoly"
    shift: float = 0.0   # x offset applied before fractional powers

    @property
    def k(self) -> int:
        return int(self.coefficients.size)

    @property
    def description(self) -> str:
        if self.kind == "linear":
            return "linear"
        if self.kind == "polynomial":
            return f"polynomial({self.degree})"
        if self.kind == "bspline":
            return f"bspline(degree={self.degree}, n_basis={self.k})"
        powers = ", ".join(f"{p:g}" for p in self.powers)
        extra = f", shift={self.shift:g}" if self.shift else ""
        return f"fracpoly(powers=({powers}){extra})"

    def basis_rows(self, xs) -> np.ndarray:
        """Row vectors B(x) of the fitted basis at each x."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        if self.kind == "bspline":
            t = np.asarray(self.knots)
            lo, hi = t[self.degree], t[-self.degree - 1]
            clipped = np.clip(xs, lo, hi)
            return BSpline.design_matrix(clipped, t, self.degree).toarray()
        if self.kind == "fracpoly":
            return _fp_design(xs + self.shift, self.powers)
        return _power_design(xs, self.degree if self.kind == "polynomial" else 1)

    def predict(self, xs) -> np.ndarray:
        return self.basis_rows(xs) @ self.coefficients

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "degree": self.degree,
            "coefficients": self.coefficients.tolist(),
            "covariance": self.covariance.tolist(),
            "sigma2": self.sigma2,
            "rss": self.rss,
            "n_obs": self.n_obs,
            "knots": list(self.knots),
            "powers": list(self.powers),
            "shift": self.shift,
            "curve": self.curve.to_json(),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "FittedModel":
        return cls(
            kind=payload["kind"],
            degree=int(payload["degree"]),
            coefficients=np.asarray(payload["coefficients"], dtype=float),
            covariance=np.asarray(payload["covariance"], dtype=float),
            sigma2=float(payload["sigma2"]),
            rss=float(payload["rss"]),
            n_obs=int(payload["n_obs"]),
            curve=Curve.from_json(payload["curve"]),
            knots=tuple(payload.get("knots", ())),
            powers=tuple(payload.get("powers", ())),
            shift=float(payload.get("shift", 0.0)),
        )


@dataclass(frozen=True)
class PrecisionCurve:
    """Pointwise precision of a fit; capped flags grid points where the
    basis variance underflowed and 1e12 was substituted."""

    curve: Curve
    capped: bool


def _power_design(xs: np.ndarray, degree: int) -> np.ndarray:
    return np.vander(xs, degree + 1, increasing=True)


def _fp_design(xs: np.ndarray, powers: tuple) -> np.ndarray:
    cols = [np.ones_like(xs)]
    log_x = np.log(xs)
    seen: dict[float, int] = {}
    for p in powers:
        base = log_x if p == 0 else xs**p
        reps = seen.get(p, 0)
        cols.append(base * log_x**reps)  # repeated power brings in a log factor
        seen[p] = reps + 1
    return np.column_stack(cols)


def _bspline_knots(basis: Basis, x: np.ndarray) -> np.ndarray:
    lo, hi = float(x.min()), float(x.max())
    n_interior = basis.n_basis - basis.degree - 1
    if n_interior:
        probs = np.arange(1, n_interior + 1) / (n_interior + 1)
        interior = np.quantile(x, probs)
        if np.any(np.diff(interior) <= 0) or interior[0] <= lo or interior[-1] >= hi:
            raise SpecValidationError(
                ["bspline interior knots collapse: x sample too concentrated"]
            )
    else:
        interior = np.empty(0)
    return np.concatenate(
        [np.full(basis.degree + 1, lo), interior, np.full(basis.degree + 1, hi)]
    )


def _solve_ols(design: np.ndarray, y: np.ndarray, label: str):
    n, k = design.shape
    if n < k:
        raise SpecValidationError([f"{label}: {n} observations for {k} coefficients"])
    coef, _, rank, svals = np.linalg.lstsq(design, y, rcond=RANK_RCOND)
    if rank < k:
        raise SingularFitError(f"{label}: design matrix rank {rank} < {k}")
    resid = y - design @ coef
    rss = float(resid @ resid)
    dof = n - k
    sigma2 = rss / dof if dof > 0 else 0.0
    # covariance through the same SVD cut used for the solve
    _, s, vt = np.linalg.svd(design, full_matrices=False)
    inv_gram = (vt.T / s**2) @ vt
    cov = sigma2 * inv_gram
    cov = 0.5 * (cov + cov.T)
    return coef, cov, sigma2, rss


def _bspline_to_curve(knots: np.ndarray, coef: np.ndarray, degree: int) -> Curve:
    pp = PPoly.from_spline(BSpline(knots, coef, degree))
    spans = np.where(np.diff(pp.x) > 0)[0]
    breaks = np.concatenate([pp.x[spans], [pp.x[spans[-1] + 1]]])
    local = pp.c[::-1, spans].T  # ascending powers in (x - left break)
    return Curve(breaks, local, smoothness=min(degree - 1, 2))


def _verify_curve(model_values, curve: Curve, grid: np.ndarray) -> None:
    got = curve.values(grid)
    tol = 1e-8 * max(1.0, float(np.max(np.abs(model_values))))
    worst = float(np.max(np.abs(got - model_values)))
    if worst > tol:
        raise CurveMetricsError(
            f"induced curve deviates from basis combination by {worst:g}"
        )


def fit_basis(data: Dataset, basis: Basis) -> FittedModel:
    """Ordinary least squares in the requested basis.

    Covariance is sigma2 * inverse Gram with sigma2 = RSS / (n - k); a
    saturated fit (n == k) reports sigma2 = 0.
    """
    if basis.kind == "bspline":
        knots = _bspline_knots(basis, data.x)
        design = BSpline.design_matrix(data.x, knots, basis.degree).toarray()
    else:
        knots = None
        degree = basis.degree if basis.kind == "polynomial" else 1
        design = _power_design(data.x, degree)
    label = basis.kind if basis.kind != "polynomial" else f"polynomial({basis.degree})"
    coef, cov, sigma2, rss = _solve_ols(design, data.y, label)

    lo, hi = data.domain
    if basis.kind == "bspline":
        curve = _bspline_to_curve(knots, coef, basis.degree)
    else:
        curve = Curve.from_polynomial((lo, hi), coef)
    model = FittedModel(
        kind=basis.kind,
        degree=basis.degree if basis.kind != "linear" else 1,
        coefficients=coef,
        covariance=cov,
        sigma2=sigma2,
        rss=rss,
        n_obs=data.n,
        curve=curve,
        knots=tuple(knots) if knots is not None else (),
    )
    grid = np.linspace(lo, hi, 257)
    _verify_curve(model.basis_rows(grid) @ coef, curve, grid)
    return model


def _fp_shift(x: np.ndarray) -> float:
    """Offset making all x strictly positive, taken from the observed spacings."""
    if x.min() > 0:
        return 0.0
    gaps = np.diff(np.unique(x))
    usable = gaps[gaps + x.min() > 0]
    if usable.size == 0:
        raise SpecValidationError(
            ["x has non-positive values and no spacing-based shift fixes that"]
        )
    return float(usable.min())


def fit_fractional_polynomial(data: Dataset, degree: int) -> FittedModel:
    """Exhaustive RSS search over the fractional-polynomial power set.

    Degree 1 tries each power once; degree 2 tries unordered pairs, a
    repeated power p contributing x^p and x^p log x.  RSS ties go to the
    candidate whose powers sit closest to 1.
    """
    if degree not in (1, 2):
        raise SpecValidationError(["fractional polynomial degree must be 1 or 2"])
    shift = _fp_shift(data.x)
    xs = data.x + shift

    if degree == 1:
        candidates = [(p,) for p in FP_POWERS]
    else:
        candidates = list(itertools.combinations_with_replacement(FP_POWERS, 2))

    results = []
    for powers in candidates:
        try:
            fit = _solve_ols(_fp_design(xs, powers), data.y, f"fracpoly{powers}")
        except SingularFitError:
            continue
        results.append((powers, fit))
    if not results:
        raise SingularFitError("every fractional-polynomial candidate is singular")

    best_rss = min(fit[3] for _, fit in results)
    tol = 1e-12 * (1.0 + best_rss)
    tied = [(powers, fit) for powers, fit in results if fit[3] <= best_rss + tol]
    powers, (coef, cov, sigma2, rss) = min(
        tied, key=lambda item: (sum(abs(p - 1.0) for p in item[0]), item[0])
    )

    lo, hi = data.domain
    grid = np.linspace(lo, hi, DENSE_SAMPLES)
    values = _fp_design(grid + shift, powers) @ coef
    curve = from_samples(np.column_stack([grid, values]), method="natural-cubic")
    return FittedModel(
        kind="fracpoly",
        degree=degree,
        coefficients=coef,
        covariance=cov,
        sigma2=sigma2,
        rss=rss,
        n_obs=data.n,
        curve=curve,
        powers=tuple(float(p) for p in powers),
        shift=shift,
    )


def precision_curve(model: FittedModel, n: int = DENSE_SAMPLES) -> PrecisionCurve:
    """p-hat(x) = 1 / (B(x) Cov B(x)'), as a dense-sampled cubic curve.

    Grid points with vanishing basis variance are capped at 1e12 and
    flagged rather than reported as infinite.
    """
    lo, hi = model.curve.domain
    grid = np.linspace(lo, hi, n)
    rows = model.basis_rows(grid)
    variance = np.einsum("ij,jk,ik->i", rows, model.covariance, rows)
    with np.errstate(divide="ignore"):
        phat = np.where(variance > 0, 1.0 / np.maximum(variance, 1e-300), np.inf)
    capped = bool(np.any(phat > PRECISION_CAP))
    phat = np.minimum(phat, PRECISION_CAP)
    curve = from_samples(np.column_stack([grid, phat]), method="natural-cubic")
    return PrecisionCurve(curve=curve, capped=capped)
