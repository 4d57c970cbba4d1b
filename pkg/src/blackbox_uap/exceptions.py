"""Exception types raised by the package."""


class InputError(ValueError):
    """A query or argument does not satisfy the oracle's input contract."""


class ParseError(ValueError):
    """A dataset or perturbation file is malformed."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class SchemaError(ValueError):
    """A model file does not match the model JSON schema."""


class FitError(ValueError):
    """A model could not be fitted to the given data."""
