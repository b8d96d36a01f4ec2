"""Exception types raised by the toolkit."""


class GeometryError(ValueError):
    """Invalid or unsupported cantilever geometry."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not converge.

    Attributes:
        residual: Last residual reached before giving up.
        trajectory: Iterates visited, when the solver records them.
    """

    def __init__(self, message, residual=None, trajectory=None):
        super().__init__(message)
        self.residual = residual
        self.trajectory = trajectory if trajectory is not None else []


class NoTransitionError(ValueError):
    """A frequency sweep has no interior minimum in the sampled range."""


class DataFormatError(ValueError):
    """Malformed device catalog or measurement file."""
