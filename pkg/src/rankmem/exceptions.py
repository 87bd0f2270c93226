"""Exception hierarchy.

Every error derives from :class:`RankMemError`; the ones that signal bad
arguments also derive from :class:`ValueError` so callers relying on the
usual numpy/scikit-learn convention keep working.
"""


class RankMemError(Exception):
    """Base class for all package errors."""


class ConfigError(RankMemError, ValueError):
    """Invalid configuration value."""


class DimensionError(RankMemError, ValueError):
    """Array shapes do not agree."""


class EmptyInputError(RankMemError, ValueError):
    """An operation that needs at least one row got none."""


class EmptyContextError(EmptyInputError):
    """Attention was asked to attend over zero key/value rows."""


class NumericError(RankMemError, ValueError):
    """Input contains NaN or infinity."""


class GroupSizeError(RankMemError, ValueError):
    """A chunk holds more key/value pairs than the bank's group size."""


class FormatError(RankMemError):
    """A snapshot file is malformed.

    Attributes:
        offset: byte offset at which the problem was detected.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class CorpusError(RankMemError, ValueError):
    """A corpus file could not be parsed."""
