"""Exception types shared across the package."""


class BellccError(Exception):
    """Base class for all package errors."""


class CapacityError(BellccError, ValueError):
    """A problem size exceeds a configured cap.

    The message names the cap and, where one exists, the command-line flag
    that raises it.
    """


class DimensionError(BellccError, ValueError):
    """Objects with incompatible party counts were combined."""


class ParseError(BellccError, ValueError):
    """An input file could not be parsed."""
