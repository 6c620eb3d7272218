"""Categorized performance measures for estimated curves against ground truth."""

from .curves import BivariateCurve, Curve, from_samples
from .errors import (
    CurveMetricsError,
    DegenerateScopeError,
    DomainError,
    SingularFitError,
    SpecValidationError,
    UnsupportedOperationError,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateCurve",
    "Curve",
    "from_samples",
    "CurveMetricsError",
    "DegenerateScopeError",
    "DomainError",
    "SingularFitError",
    "SpecValidationError",
    "UnsupportedOperationError",
    "__version__",
]
