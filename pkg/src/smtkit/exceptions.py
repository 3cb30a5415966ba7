"""Exception hierarchy shared by every stage.

The CLI maps these onto exit codes: configuration problems exit with 1,
bad input data with 2 and broken internal invariants with 3.
"""


class SmtkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class ConfigError(SmtkitError):
    exit_code = 1


class DataError(SmtkitError):
    """Malformed or inconsistent input data.

    ``line`` is the 1-based line number in the offending file when known.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class DecodeError(DataError):
    """Input bytes are not valid UTF-8; ``offset`` is the first bad byte."""

    def __init__(self, offset, reason="invalid UTF-8"):
        self.offset = offset
        super().__init__(f"{reason} at byte offset {offset}")


class ParseError(DataError):
    """Bracketed tree or rule text could not be parsed."""

    def __init__(self, message, offset=None, line=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message, line=line)


class MarkerCollisionError(DataError):
    """A word handed to the suffix splitter already contains the marker."""

    def __init__(self, word, marker, position=None):
        self.word = word
        self.marker = marker
        self.position = position
        msg = f"word {word!r} already contains continuation marker {marker!r}"
        if position is not None:
            msg = f"token {position}: {msg}"
        super().__init__(msg)


class SizingError(DataError):
    pass


class TrainingError(DataError):
    pass


class OracleGuardError(ValueError, SmtkitError):
    """Exhaustive search requested on inputs too long to enumerate."""

    exit_code = 2


class InvariantError(SmtkitError):
    exit_code = 3
