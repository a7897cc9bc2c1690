"""Shared exception types."""


class MatrixFormatError(ValueError):
    """Raised when a matrix/graph/recipe file cannot be parsed or fails validation."""


class CapExceededError(ValueError):
    """Raised when an instance exceeds a solver's size cap."""
