"""Exception types raised by pooledscale."""


class PooledScaleError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(PooledScaleError, ValueError):
    """An argument is outside its allowed range (e.g. k > n)."""


class InvalidDataError(PooledScaleError, ValueError):
    """Input values are unusable (non-finite, empty, ...)."""


class DatasetError(PooledScaleError):
    """A delimited input file could not be ingested.

    ``row`` and ``column`` locate the offending cell (1-based row counted
    over the physical lines of the file, column by name).
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
