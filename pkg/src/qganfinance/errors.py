"""Exception hierarchy shared by every qganfinance module.

Each exception class carries the process exit code the CLI reports for it:
2 for configuration and validation failures, 3 for artifact I/O failures,
4 for numerical failures during training.
"""

from __future__ import annotations

from pathlib import Path
from typing import ClassVar


class QganError(Exception):
    """Base class for all package errors."""

    exit_code: ClassVar[int] = 1


# --- validation (exit 2) ---------------------------------------------------


class ValidationError(QganError):
    """Input or configuration violates a documented precondition."""

    exit_code: ClassVar[int] = 2


class ConfigError(ValidationError):
    """Run configuration failed schema or consistency validation."""


class ParseError(ValidationError):
    """A CSV row could not be parsed."""

    def __init__(self, row: int, detail: str = "") -> None:
        """Record the 1-based data row that failed."""
        self.row = row
        msg = f"ParseError(row {row})" + (f": {detail}" if detail else "")
        super().__init__(msg)


class NonPositivePrice(ValidationError):
    """A price row holds a value <= 0."""

    def __init__(self, row: int) -> None:
        """Record the offending data row."""
        self.row = row
        super().__init__(f"NonPositivePrice(row {row})")


class NonMonotoneDate(ValidationError):
    """Dates are not strictly increasing."""

    def __init__(self, row: int) -> None:
        """Record the offending data row."""
        self.row = row
        super().__init__(f"NonMonotoneDate(row {row})")


class TooShort(ValidationError):
    """A series is shorter than the operation requires."""


class SeriesTooShort(TooShort):
    """A series is shorter than one rolling window."""


class ZeroVariance(ValidationError):
    """A sample has zero standard deviation."""


class NegativeArgument(ValidationError):
    """Lambert W was asked for a negative argument."""


class OutOfRange(ValidationError):
    """A generated value lies outside [-1, 1]."""

    def __init__(self, entry: tuple[int, ...], value: float) -> None:
        """Record the offending matrix entry."""
        self.entry = entry
        self.value = value
        super().__init__(f"OutOfRange(entry {entry}): {value!r}")


class LengthMismatch(ValidationError):
    """Vector lengths disagree with the declared layout."""


class TooManyQubits(ValidationError):
    """Dense simulation requested above the memory guard."""


class InvalidBond(ValidationError):
    """Bond dimension must be >= 1."""


class DimensionMismatch(ValidationError):
    """Two states act on different qubit counts."""


class ShapeMismatch(ValidationError):
    """Array shapes disagree with the network configuration."""


class StaleTape(ValidationError):
    """A tape no longer matches the values it recorded."""


class WindowMismatch(ValidationError):
    """Generator output length 2n differs from the window length m."""


class EmptyInput(ValidationError):
    """A sample set is empty."""


class CheckpointMismatch(ValidationError):
    """A checkpoint does not match the requested configuration."""


# --- artifact I/O (exit 3) -------------------------------------------------


class ArtifactIOError(QganError):
    """Reading or writing an artifact failed."""

    exit_code: ClassVar[int] = 3


class MissingFile(ArtifactIOError):
    """A required input file does not exist."""

    def __init__(self, path: str | Path) -> None:
        """Record the missing path."""
        self.path = Path(path)
        super().__init__(f"MissingFile: {self.path}")


# --- numerical (exit 4) ----------------------------------------------------


class NumericalError(QganError):
    """A computation produced non-finite values."""

    exit_code: ClassVar[int] = 4


class NonFiniteLoss(NumericalError):
    """A training loss became NaN or infinite."""

    def __init__(self, which: str, epoch: int | None = None) -> None:
        """Record which loss diverged and when."""
        self.which = which
        self.epoch = epoch
        where = f" at epoch {epoch}" if epoch is not None else ""
        super().__init__(f"NonFiniteLoss({which}){where}")
