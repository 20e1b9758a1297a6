"""Exception types shared across the package."""


class WarpflowError(Exception):
    """Base class for all package errors."""


class DomainError(WarpflowError):
    """A coordinate left the interval on which the ambient space is defined."""


class DomainEscapeError(DomainError):
    """A flow trajectory left the ambient domain; carries the escape time."""

    def __init__(self, message, escape_time=None):
        super().__init__(message)
        self.escape_time = escape_time


class DegeneracyError(WarpflowError):
    """Metric degeneracy (warp factor vanishing) at the requested point."""


class AdmissibilityError(WarpflowError):
    """Principal curvatures left the admissible cone of a speed function."""


class NotSpaceFormError(WarpflowError):
    """An operation requiring a constant-curvature preset was called on
    a generic ambient."""


class ScenarioError(WarpflowError):
    """Scenario file failed validation; carries the offending field path."""

    def __init__(self, message, path=()):
        super().__init__(message)
        self.path = tuple(path)
