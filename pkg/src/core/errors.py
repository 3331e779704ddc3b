#!/usr/bin/env python3
"""
Error Hierarchy for SpilloverScope
==================================

Every failure the pipeline can report maps onto one category and one
process exit code, so the CLI can emit a single machine-parseable line.
"""

from typing import Optional


class SpilloverError(Exception):
    """Base class for all pipeline failures"""

    exit_code: int = 1
    category: str = "error"

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def to_line(self, stage: Optional[str] = None) -> str:
        """Single-line, machine-parseable rendering used on stderr."""
        escaped = self.message.replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")
        return f'error category={self.category} stage={stage or self.stage or "unknown"} message="{escaped}"'


class ConfigValidationError(SpilloverError, ValueError):
    exit_code = 2
    category = "config"


class DataFaultError(SpilloverError, ValueError):
    exit_code = 3
    category = "data"


class InsufficientDataError(DataFaultError):
    """Sample too short for the requested operation"""


class EmptyIntersectionError(DataFaultError):
    """Calendars of the input series share no date"""


class NumericalFailureError(SpilloverError, ArithmeticError):
    exit_code = 4
    category = "numerical"


class SingularMatrixError(NumericalFailureError):
    """Regressor Gram matrix is rank deficient"""


class DegenerateInputError(NumericalFailureError):
    """Constant series, zero variance or zero denominators"""


class PositiveDefinitenessError(NumericalFailureError):
    """Covariance drifted outside the PSD cone beyond repair tolerance"""


class InternalError(SpilloverError):
    """Unexpected exception wrapped for reporting"""
    category = "internal"
