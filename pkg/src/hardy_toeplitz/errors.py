"""Exception types shared across the package."""

from __future__ import annotations


class HardyToeplitzError(Exception):
    """Base class for all package errors."""


class SymbolError(HardyToeplitzError, ValueError):
    """A symbol violates its construction invariants."""


class LeadingCoefficientError(SymbolError):
    """The top antianalytic coefficient c_N is zero."""


class CapError(SymbolError):
    """A symbol exceeds the configured degree caps."""


class DomainError(HardyToeplitzError, ValueError):
    """Evaluation requested outside the domain of definition."""


class RootFindingError(HardyToeplitzError, ArithmeticError):
    """Root iteration or winding refinement failed to converge."""


class PreconditionError(HardyToeplitzError, ValueError):
    """An operation was called with inputs that violate its precondition.

    ``detail`` carries structured diagnostics (offending roots, condition
    numbers) for callers that want more than the message.
    """

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.detail = detail
