"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations

import math


class AlphaMuError(Exception):
    """Base class for all errors raised by :mod:`alphamu`."""


class DomainError(AlphaMuError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(AlphaMuError, ArithmeticError):
    """A series or iteration hit its term cap before reaching the target.

    ``value`` holds the best partial result and ``bound`` the best error
    estimate available at the moment of failure (``nan`` when unknown).
    """

    def __init__(self, message: str, value: float = math.nan, bound: float = math.nan,
                 terms: int = 0):
        super().__init__(message)
        self.value = value
        self.bound = bound
        self.terms = terms


class NumericRangeError(AlphaMuError, ArithmeticError):
    """A quantity left the double range or cannot be resolved in double precision."""


class ResolutionError(ConvergenceError):
    """A grid or quadrature rule is too coarse for the requested accuracy."""


class ValidationFailure(AlphaMuError):
    """Cross-validation between independent routes exceeded its tolerance."""


def require(condition: bool, message: str) -> None:
    if not condition:
        raise DomainError(message)


def require_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a finite positive number, got {value!r}")
    return value
