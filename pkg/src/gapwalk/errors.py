"""Exception types shared across the package."""


class GapwalkError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GapwalkError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedRepresentationError(GapwalkError, TypeError):
    """The requested method does not apply to this function representation."""


class DegenerateFitError(GapwalkError, RuntimeError):
    """A regression had no usable points (e.g. all decay gaps underflowed)."""
