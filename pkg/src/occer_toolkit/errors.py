"""Exception types shared across the toolkit."""

from typing import Optional


class OccerError(Exception):
    """Base class for toolkit errors."""


class ConfigError(OccerError, ValueError):
    """Invalid configuration, flag, or hyperparameter."""


class DataError(OccerError, ValueError):
    """Dataset or input matrix violates a precondition."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.row = row
        self.column = column


class ModelError(OccerError, ValueError):
    """Model file is unreadable or incompatible with the input."""


class FoldError(OccerError):
    """A cross-validation fold failed; wraps the original exception."""

    def __init__(self, message: str, repetition: int, fold: int):
        super().__init__(f"repetition {repetition}, fold {fold}: {message}")
        self.repetition = repetition
        self.fold = fold
