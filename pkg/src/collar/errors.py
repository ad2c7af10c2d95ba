"""Exception types raised by the collar construction pipeline."""


class CollarError(Exception):
    """Base class for all pipeline errors."""


class ArgumentError(CollarError, ValueError):
    """An argument lies outside the domain of an operation."""


class PositivityError(CollarError):
    """A metric is not positive definite at some node."""

    def __init__(self, message, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value


class MeanConvexityViolation(CollarError):
    """The boundary is not strictly mean convex (tr h0' <= 0 somewhere)."""

    def __init__(self, message, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value


class InternalConsistencyError(CollarError):
    """A self-check of a closed-form construction failed."""


class DenominatorVanished(CollarError):
    """The second warp branch is undefined on the requested interval."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NonConvergence(CollarError):
    """An iterative search exhausted its budget."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class TangencyAtEndpoint(CollarError):
    """The warp matching point landed on an endpoint of its bracket."""


class AuditFailure(CollarError):
    """A sampled curvature bound is violated at a finer audit resolution."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ResolutionError(CollarError):
    """A grid is too coarse for the requested stencil."""
