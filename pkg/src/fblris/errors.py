"""Exception types raised across the package."""


class FblrisError(Exception):
    """Base class for all package errors."""


class DomainError(FblrisError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedError(FblrisError, ValueError):
    """Requested configuration is outside what is implemented (scheme, degree cap, ...)."""


class ShapeError(FblrisError, ValueError):
    """Array dimensions do not match."""


class InsufficientSamplesError(FblrisError, ValueError):
    """Monte Carlo sample count below the floor."""


class CombinatorialBlowupError(FblrisError, ValueError):
    """Input enumeration would exceed the size cap."""


class NumericError(FblrisError, ArithmeticError):
    """A numerical procedure failed to converge."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({details})"
