"""Exception hierarchy shared by all ranklens modules.

The CLI maps these onto exit codes: DataError and subclasses exit 2,
OSError exits 3, usage problems exit 1.
"""


class RanklensError(Exception):
    """Base class for all errors raised by this package."""


class DataError(RanklensError):
    """Input data violates a format or structural contract."""


class ParseError(DataError):
    """A line of an input file could not be parsed.

    Carries the path and 1-based line number for diagnostics.
    """

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class StructureError(DataError):
    """Parsed records violate a cross-record invariant (duplicates, rank gaps...)."""


class IndexFormatError(DataError):
    """An index file does not carry the expected magic bytes or version."""


class CorruptIndexError(DataError):
    """An index file is truncated or fails its checksum."""
