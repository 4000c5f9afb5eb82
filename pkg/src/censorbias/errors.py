"""Exception taxonomy shared across the package."""


class CensorBiasError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CensorBiasError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class SchemaError(CensorBiasError, ValueError):
    """Tabular input does not match the declared column mapping."""


class NoEventsError(CensorBiasError, ValueError):
    """The operation needs at least one observed event."""


class NonConvergenceError(CensorBiasError, ArithmeticError):
    """An iterative fit failed to converge (e.g. monotone likelihood)."""
