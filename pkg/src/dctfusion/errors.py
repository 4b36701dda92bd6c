"""Exception hierarchy shared by every module."""


class DctFusionError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DctFusionError, ValueError):
    """Malformed file content. ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class DomainError(DctFusionError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class RangeError(DomainError):
    """An image carries the wrong value-range tag for the requested operation."""


class ShapeError(DomainError):
    """Images or arrays that must agree in size do not."""


class EstimationError(DctFusionError):
    """Response-curve estimation is underdetermined or singular."""
