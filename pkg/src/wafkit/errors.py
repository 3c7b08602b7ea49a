"""Exception hierarchy. The CLI maps these onto exit codes."""

from __future__ import annotations


class WafError(Exception):
    """Base class for toolkit errors."""


class DomainError(WafError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ConfigError(WafError, ValueError):
    """Malformed or incompatible configuration (CLI exit code 2)."""


class ConvexityError(WafError):
    """A shape violates the convexity class an operation requires.

    ``step`` is set when the violation is detected during a flow run.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class NumericalError(WafError, ArithmeticError):
    """Non-finite values, blow-up, or failed convergence (CLI exit code 3)."""
