"""Exception hierarchy shared by every module."""


class FirstKindError(ValueError):
    """Base class for all library errors."""


class DimensionMismatch(FirstKindError):
    pass


class InvalidStateError(FirstKindError):
    """A matrix fails a density-matrix, Hermiticity or unitarity check."""


class ZeroProbabilityError(FirstKindError):
    """Conditioning on an outcome whose probability is (numerically) zero."""


class QuadratureError(FirstKindError):
    """A quadrature rule failed its own refinement check."""


class ConvergenceError(FirstKindError):
    """An iterative or series evaluation did not converge."""


class DomainError(FirstKindError):
    """Parameters outside the domain where a formula holds."""


class SingularSolveError(FirstKindError):
    """A resolvent solve hit a (numerically) singular matrix."""
