"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`RsaError`
so harnesses can catch the whole family at once. The CLI maps
:class:`InputError` subclasses to exit code 2 and everything else to 1.
"""


class RsaError(Exception):
    """Base class for all package errors."""


class InputError(RsaError):
    """Malformed or inconsistent input (files, ids, options)."""


class ComputationError(RsaError):
    """Valid input on which a computation is undefined."""


class LengthMismatch(ComputationError, ValueError):
    pass


class DegenerateInput(ComputationError, ValueError):
    """A constant vector where variation is required."""


class EmptySelection(ComputationError):
    """Feature selection removed every feature."""


class EmptySet(ComputationError):
    """An aggregate was requested over zero items."""


class NotPositiveSemidefinite(ComputationError, ValueError):
    pass


class StimulusMismatch(InputError):
    """Stimulus ids or their order differ between two objects."""


class MissingCondition(InputError):
    pass


class MissingModel(InputError):
    pass


class UnknownId(InputError):
    pass


class ParseError(InputError):
    """Malformed text input; carries 1-based ``line`` and ``column``."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)


class DuplicateId(ParseError):
    pass


class NonFiniteValue(ParseError):
    pass


class SchemaError(InputError):
    pass


class MissingFile(InputError, FileNotFoundError):
    pass


class UnknownCondition(InputError):
    pass


class ConsistencyError(InputError):
    """A stored aggregate disagrees with the values it summarizes."""
