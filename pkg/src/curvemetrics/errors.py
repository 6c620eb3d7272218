"""Exception types shared across the package."""


class CurveMetricsError(Exception):
    """Base class for all package errors."""


class DomainError(CurveMetricsError):
    """Evaluation or parameter outside the curve / distribution domain."""


class SpecValidationError(CurveMetricsError):
    """A measure specification violates the aspect rules.

    Carries the full violation list so callers can report every offending
    aspect pair at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DegenerateScopeError(CurveMetricsError):
    """Scope resolution produced an empty or zero-length interval."""


class SingularFitError(CurveMetricsError):
    """Design matrix is rank deficient for the requested basis."""


class UnsupportedOperationError(CurveMetricsError):
    """Operation not defined for this distribution kind."""
