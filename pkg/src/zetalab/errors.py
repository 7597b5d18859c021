"""Exception types shared across the package."""


class ZetalabError(Exception):
    """Base class for all computational errors raised by zetalab."""


class DomainError(ZetalabError):
    """Argument outside the range an operation is defined on."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class SingularityError(DomainError):
    """Evaluation requested at a zero/pole of a defining factor."""


class ConvergenceError(DomainError):
    """Series or product does not converge at the requested point."""


class PrecisionError(ZetalabError):
    """A rigorous error bound below the requested target could not be met."""


class ResourceLimitError(ZetalabError):
    """A configured memory or evaluation budget would be exceeded."""


class DegenerateFitError(ZetalabError):
    """Fit data does not span enough range to determine the constant."""


class GridResolutionWarning(UserWarning):
    """Two sign changes closer than one scan step; grid may be too coarse."""
