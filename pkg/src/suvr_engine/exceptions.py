"""
Exception hierarchy shared by every SUVR module.
"""


class SuvrError(Exception):
    """Base class for all domain errors raised by the engine."""


class NormTooSmallError(SuvrError, ValueError):
    """A vector was too close to zero to be L2-normalized."""


class NotUnitNormError(SuvrError, ValueError):
    """Rows that must be unit-norm are not."""


class DimensionMismatchError(SuvrError, ValueError):
    """Two operands disagree on their dimension."""


class NonPositiveTemperatureError(SuvrError, ValueError):
    """Softmax temperature must be strictly positive."""


class NotEnoughCandidatesError(SuvrError, ValueError):
    """Fewer selectable instances remain than were requested."""


class NegativesExhaustPositivesError(SuvrError, ValueError):
    """Carving m negatives would leave no positive neighbor."""


class NeighborSetError(SuvrError, ValueError):
    """Positive/negative index sets overlap, repeat or contain the query."""


class IndexOutOfRangeError(SuvrError, IndexError):
    """An instance index lies outside the memory bank."""


class CheckpointError(SuvrError, ValueError):
    """A checkpoint archive is missing fields or has the wrong version."""


class TrainingError(SuvrError, RuntimeError):
    """A training step could not be completed."""

    def __init__(self, message: str, instance: int | None = None):
        super().__init__(message)
        self.instance = instance


class DatasetFormatError(SuvrError, ValueError):
    """An input file could not be decoded; row/column point at the culprit."""

    def __init__(
        self,
        message: str,
        row: int | None = None,
        column: int | None = None,
    ):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ConfigError(SuvrError, ValueError):
    """The experiment configuration is missing, unreadable or invalid."""
