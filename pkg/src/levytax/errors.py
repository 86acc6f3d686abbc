"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, accuracy failures with 3, domain violations with 4.
"""
from __future__ import annotations

__all__ = [
    "DomainError",
    "AccuracyError",
    "UnsupportedOperationError",
    "RepeatedPoleError",
    "ConfigError",
]


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class AccuracyError(RuntimeError):
    """A numerical routine could not certify the requested tolerance.

    ``achieved`` carries the error estimate that was actually reached.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class UnsupportedOperationError(RuntimeError):
    """The operation is not defined for this representation or variant."""


class RepeatedPoleError(ValueError):
    """The rational transform has (numerically) coincident poles."""


class ConfigError(ValueError):
    """A command-line or config-file value is malformed."""
