"""Exception hierarchy shared across the package."""


class PggpError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(PggpError, ValueError):
    """A caller-supplied argument violates a documented precondition."""


class NumericalError(PggpError, ArithmeticError):
    """A numerical routine failed (non-PD matrix, rejection cap, ...)."""


class SchemaError(PggpError, ValueError):
    """A file's structure does not match the documented schema."""


class DatasetParseError(SchemaError):
    """A dataset line could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


class UnsupportedVersionError(SchemaError):
    """A persisted file declares a format_version this build cannot read."""
