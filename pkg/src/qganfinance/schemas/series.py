"""Schemas for market data, pipeline configuration and training windows."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from qganfinance.errors import NonMonotoneDate, NonPositivePrice, OutOfRange, TooShort, ValidationError, ZeroVariance

MIN_PRICES = 2
MIN_WINDOW = 2


@dataclass(frozen=True)
class PriceSeries:
    """Ordered close prices with their date labels."""

    timestamps: NDArray[np.datetime64]
    prices: NDArray[np.float64]

    def __post_init__(self) -> None:
        """Validate positivity, ordering and length."""
        if len(self.prices) < MIN_PRICES:
            msg = f"PriceSeries needs at least {MIN_PRICES} prices, got {len(self.prices)}"
            raise TooShort(msg)
        if len(self.timestamps) != len(self.prices):
            msg = "timestamps and prices differ in length"
            raise ValidationError(msg)
        bad = np.flatnonzero(~(self.prices > 0))
        if bad.size:
            raise NonPositivePrice(int(bad[0]) + 1)
        steps = np.diff(self.timestamps)
        bad = np.flatnonzero(steps <= np.timedelta64(0, "D"))
        if bad.size:
            raise NonMonotoneDate(int(bad[0]) + 2)

    def __len__(self) -> int:
        """Return the number of prices."""
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSeries:
    """Dimensionless log returns (or any transform of them along the pipeline)."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        """Reject non-finite values."""
        if not np.all(np.isfinite(self.values)):
            msg = "ReturnSeries values must be finite"
            raise ValidationError(msg)

    def __len__(self) -> int:
        """Return the number of values."""
        return len(self.values)


@dataclass(frozen=True)
class NormStats:
    """Mean and standard deviation removed by the normalization step."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        """Require a strictly positive scale."""
        if not self.std > 0:
            msg = f"NormStats.std must be > 0, got {self.std!r}"
            raise ZeroVariance(msg)


@dataclass(frozen=True)
class PipelineConfig:
    """Parameters of the four-step pre-processing."""

    delta: float = 0.5
    clip_bound: float = 4.0
    window: int = 20
    stride: int = 5

    def __post_init__(self) -> None:
        """Validate ranges."""
        if not self.delta >= 0:
            msg = f"delta must be >= 0, got {self.delta!r}"
            raise ValidationError(msg)
        if not self.clip_bound > 0:
            msg = f"clip_bound must be > 0, got {self.clip_bound!r}"
            raise ValidationError(msg)
        if self.window < MIN_WINDOW:
            msg = f"window must be >= {MIN_WINDOW}, got {self.window}"
            raise ValidationError(msg)
        if not 1 <= self.stride <= self.window:
            msg = f"stride must lie in [1, window], got {self.stride}"
            raise ValidationError(msg)


def window_count(length: int, window: int, stride: int) -> int:
    """Return floor((T - m) / s) + 1, the number of rolling windows."""
    return (length - window) // stride + 1


@dataclass(frozen=True)
class WindowBatch:
    """Training corpus: pre-processed windows in [-1, 1] plus what is needed to invert them."""

    samples: NDArray[np.float64]
    norm_stats: NormStats
    config: PipelineConfig
    source_length: int = field(default=-1)

    def __post_init__(self) -> None:
        """Check range, width and the window-count formula."""
        if self.samples.ndim != 2 or self.samples.shape[1] != self.config.window:  # noqa: PLR2004
            msg = f"samples must have shape (num_windows, {self.config.window}), got {self.samples.shape}"
            raise ValidationError(msg)
        outside = np.argwhere(np.abs(self.samples) > 1.0)
        if outside.size:
            entry = tuple(int(i) for i in outside[0])
            raise OutOfRange(entry, float(self.samples[entry]))
        if self.source_length >= 0:
            expected = window_count(self.source_length, self.config.window, self.config.stride)
            if expected != self.samples.shape[0]:
                msg = f"expected {expected} windows for T={self.source_length}, got {self.samples.shape[0]}"
                raise ValidationError(msg)

    @property
    def num_windows(self) -> int:
        """Return the number of sample rows."""
        return int(self.samples.shape[0])
