"""
Solver exception types
"""

from typing import Optional


class LevelMismatchError(ValueError):
    """Grid function or operator used on a level it does not belong to."""


class FactorizationError(RuntimeError):
    """Zero or non-positive pivot while factorizing a preconditioner or coarse matrix."""


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"Invalid {key}: {message}")
        self.key = key


class DivergenceError(RuntimeError):
    """
    Raised when the residual grows past the divergence guard.

    The partial SolveReport is attached as ``report``.
    """

    def __init__(self, message: str, report: Optional[object] = None):
        super().__init__(message)
        self.report = report
