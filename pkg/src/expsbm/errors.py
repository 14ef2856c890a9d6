"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input data violates a structural contract (lengths, overlaps, shapes)."""


class NumericalError(ArithmeticError):
    """A computation produced non-finite values it cannot recover from."""
