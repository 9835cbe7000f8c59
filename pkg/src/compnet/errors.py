"""Exceptions shared across the package."""


class MetricUndefinedError(ValueError):
    """A metric has no defined value for the given matrix.

    Raised, for example, for NODF of a 1 x 1 matrix. Ensemble summaries
    catch this to exclude the offending sample rather than aborting.
    """


class BicmConvergenceError(RuntimeError):
    """The bipartite configuration model solver failed to converge.

    Carries the residual (largest absolute degree mismatch) reached when
    iteration stopped.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
