"""Exception hierarchy.

The CLI maps these onto its exit-code contract: hypothesis violations
(including domain errors) exit with 2, convergence/root failures with 3,
everything else (I/O, parsing, bad evaluations) with 1.
"""


class PerronBoundsError(Exception):
    """Base class for all errors raised by this package."""


class HypothesisViolationError(PerronBoundsError):
    """An input violates a hypothesis of the bound machinery.

    Examples: a test kernel whose row sum is not strictly positive, or a
    base kernel with a negative entry.
    """


class DomainError(HypothesisViolationError):
    """A value lies outside the mathematically admissible domain."""


class DegenerateMeasureError(HypothesisViolationError):
    """A measure assigns zero total mass where positive mass is required."""


class UnstableSystemError(HypothesisViolationError):
    """The modulated source has non-negative mean drift; no decay rate exists."""


class EvaluationError(PerronBoundsError):
    """A kernel density produced a non-finite value at a quadrature node."""


class NoConvergenceError(PerronBoundsError):
    """Power iteration exhausted its budget without meeting the tolerance."""

    def __init__(self, message: str, last_estimate: float | None = None):
        super().__init__(message)
        self.last_estimate = last_estimate


class NoRootError(PerronBoundsError):
    """No tilt parameter with unit spectral radius exists in the search range."""


class VerificationFailure(PerronBoundsError):
    """A counterexample sub-check did not hold at the requested tolerance."""
