"""Exception types raised across the package."""


class GraphonError(Exception):
    """Base class for all package errors."""


class DomainError(GraphonError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(GraphonError, ValueError):
    """Input data violates a structural invariant (symmetry, range, shape)."""


class SizeError(GraphonError, ValueError):
    """Problem size is too large for the requested exact method."""


class ParameterError(GraphonError, ValueError):
    """Model parameters violate a stated condition."""


class HypothesisViolation(GraphonError):
    """A runtime check of a structural hypothesis (e.g. Q > 0) failed."""


class GaugeError(GraphonError):
    """Gauge handling failed (singular operator, missing zero mode, ...)."""


class SingularJacobianError(GaugeError):
    """The frozen or discrete Jacobian is numerically singular."""


class DivergenceError(GraphonError):
    """An iteration left every reasonable neighbourhood of the start."""


class NumericError(GraphonError):
    """A dense linear algebra routine failed to converge."""


class RangeError(GraphonError, IndexError):
    """A requested index (e.g. a Fourier mode) is not available."""


class ShapeError(ValidationError):
    """Array dimensions do not match."""
