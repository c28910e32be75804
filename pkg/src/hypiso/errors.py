"""Exception hierarchy shared by every module of the package."""


class HypisoError(Exception):
    """Base class for all numerical and domain failures raised here."""


class DomainError(HypisoError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConditioningError(HypisoError, ArithmeticError):
    """Floating point breakdown, e.g. an interior point pushed onto the sphere."""


class ConvergenceError(HypisoError):
    """An iterative procedure exhausted its budget."""


class TruncationError(HypisoError):
    """The tail beyond the truncation radius is too large to be trusted."""


class ChartError(HypisoError):
    """A chart produced a non-finite or degenerate Gram determinant."""
