"""Exception types raised across the package.

All of them derive from :class:`ValueError` so callers that only care about
"bad input" can catch one thing.
"""


class InvalidGateError(ValueError):
    """A gate references a qubit outside the register, or CX has control == target."""


class DomainError(ValueError):
    """An input value lies outside its admissible domain."""


class DimensionMismatchError(ValueError):
    """Array lengths or qubit counts do not agree."""


class DatasetParseError(ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
