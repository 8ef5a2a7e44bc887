"""Exception types raised across the package."""


class QKMeansError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(QKMeansError, ValueError):
    pass


class StaleCacheError(QKMeansError):
    """A cached kernel does not match the requested dataset or config."""


class SchemaError(QKMeansError, ValueError):
    pass


class ParseError(QKMeansError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ValidationError(QKMeansError, ValueError):
    pass
