"""
Exception hierarchy shared by the library and the command-line harness.
"""
from __future__ import annotations

from typing import List, Optional


class SureMapError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SureMapError, ValueError):
    pass


class DegenerateVarianceError(SureMapError):
    pass


class NumericalError(SureMapError, ArithmeticError):
    def __init__(self, message: str, condition: Optional[float] = None, threshold: Optional[float] = None) -> None:
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e}, threshold {threshold:.1e})"
        super().__init__(message)
        self.condition = condition
        self.threshold = threshold


class DataError(SureMapError):
    def __init__(self, message: str, issues: Optional[List[str]] = None) -> None:
        self.issues = list(issues or [])
        if self.issues:
            message = message + "\n" + "\n".join(self.issues)
        super().__init__(message)
