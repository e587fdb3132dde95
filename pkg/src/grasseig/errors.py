"""Exception types shared across the package."""


class GrasseigError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(GrasseigError, ValueError):
    """Array dimensions do not conform."""


class FormatError(GrasseigError, ValueError):
    """Malformed or unsupported matrix file contents."""


class SymmetryError(GrasseigError, ValueError):
    """Matrix declared general is not symmetric within tolerance."""


class SizeError(GrasseigError, ValueError):
    """Problem size outside the supported range (e.g. dense-oracle cap)."""


class InjectivityError(GrasseigError, ValueError):
    """Logarithm requested outside the injectivity domain of the manifold."""


class DegenerateStepError(GrasseigError, RuntimeError):
    """A step produced a numerically rank-deficient representative."""


class GeometryError(GrasseigError, RuntimeError):
    """A solver produced tangent data outside the valid geometric domain."""


class DegenerateGapError(GrasseigError, ValueError):
    """Spectral gap is zero; accelerated parameters are undefined."""


class ParameterError(GrasseigError, RuntimeError):
    """Solver parameter sequence violated a required bound."""


class SolverRunError(GrasseigError, RuntimeError):
    """A solver run failed; carries the partial trace recorded so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
