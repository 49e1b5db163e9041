"""Shared exception types."""


class WeylLabError(Exception):
    """Base class for all package errors."""


class DomainError(WeylLabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DegenerateMetricError(DomainError):
    """Metric is singular (or numerically indistinguishable from singular)."""


class VarianceError(WeylLabError, ValueError):
    """Tensor slot variance does not match the requested operation."""


class StencilError(WeylLabError):
    """A finite-difference stencil point failed a required precondition."""


class InapplicableCheck(WeylLabError):
    """Signal (not a failure): a check's hypotheses do not hold at this point.

    Examples: conformally flat point, null Weyl square, null recurrence
    covector. Carried reason strings end up in reports.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
