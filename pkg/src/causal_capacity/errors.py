"""Exception hierarchy shared by every module of the package."""


class CausalCapacityError(Exception):
    """Base class for all errors raised by this package."""


class LayoutError(CausalCapacityError, ValueError):
    """Labels are duplicated, missing, or do not match the expected layout."""


class DimensionError(CausalCapacityError, ValueError):
    """Operands have incompatible dimensions."""


class InvalidOperatorError(CausalCapacityError, ValueError):
    """A matrix violates a required property (Hermitian, PSD, unitary, CPTP...)."""


class InputFileError(CausalCapacityError):
    """Base class for problems with user-supplied description files."""


class ParseError(InputFileError):
    """The file is unreadable or is not valid JSON."""


class SchemaError(InputFileError):
    """The JSON document does not follow the expected structure.

    ``path`` points at the offending node, e.g. ``$.kraus[0][1][0]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantViolationError(InputFileError):
    """The document parses but the object it describes is not valid."""


class UnknownExperimentError(CausalCapacityError, KeyError):
    """No experiment with the requested name is registered."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown experiment"
