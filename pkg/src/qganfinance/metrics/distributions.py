"""Distribution comparisons: Wasserstein-1, QQ points, histograms, moments."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy import stats  # type: ignore[import-untyped]

from qganfinance.errors import EmptyInput, ValidationError
from qganfinance.schemas.metrics import DistributionSummary

MIN_COUNT = 2


def _non_empty(samples: NDArray[np.float64], name: str) -> NDArray[np.float64]:
    values = np.asarray(samples, dtype=np.float64).ravel()
    if values.size == 0:
        msg = f"{name} is empty"
        raise EmptyInput(msg)
    return values


def emd_1d(a: NDArray[np.float64], b: NDArray[np.float64]) -> float:
    """Exact Wasserstein-1 distance between two empirical distributions."""
    return float(stats.wasserstein_distance(_non_empty(a, "a"), _non_empty(b, "b")))


def aligned_mad(a: NDArray[np.float64], b: NDArray[np.float64]) -> float:
    """Time-aligned mean absolute difference of paired rows.

    Rows are paired in order up to the shorter matrix; columns up to the
    narrower one.
    """
    x = np.atleast_2d(np.asarray(a, dtype=np.float64))
    y = np.atleast_2d(np.asarray(b, dtype=np.float64))
    rows = min(x.shape[0], y.shape[0])
    cols = min(x.shape[1], y.shape[1])
    if rows == 0 or cols == 0:
        msg = "aligned_mad needs non-empty inputs"
        raise EmptyInput(msg)
    return float(np.mean(np.abs(x[:rows, :cols] - y[:rows, :cols])))


def qq_points(a: NDArray[np.float64], b: NDArray[np.float64], count: int) -> NDArray[np.float64]:
    """Return (count, 2) paired quantiles at levels k / (count + 1)."""
    if count < MIN_COUNT:
        msg = f"count must be >= {MIN_COUNT}, got {count}"
        raise ValidationError(msg)
    levels = np.arange(1, count + 1) / (count + 1)
    return np.column_stack([np.quantile(_non_empty(a, "a"), levels), np.quantile(_non_empty(b, "b"), levels)])


def pdf_histogram(
    samples: NDArray[np.float64],
    bins: int,
    value_range: tuple[float, float] | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Density-normalized histogram; returns (bin_edges, densities)."""
    if bins < MIN_COUNT:
        msg = f"bins must be >= {MIN_COUNT}, got {bins}"
        raise ValidationError(msg)
    densities, edges = np.histogram(_non_empty(samples, "samples"), bins=bins, range=value_range, density=True)
    return edges, densities


def distribution_summary(samples: NDArray[np.float64]) -> DistributionSummary:
    """Mean, sample std, skewness and excess kurtosis."""
    values = _non_empty(samples, "samples")
    if values.size < MIN_COUNT or np.all(values == values[0]):
        return DistributionSummary(mean=float(np.mean(values)), std=0.0, skewness=0.0, excess_kurtosis=0.0)
    return DistributionSummary(
        mean=float(np.mean(values)),
        std=float(np.std(values, ddof=1)),
        skewness=float(stats.skew(values)),
        excess_kurtosis=float(stats.kurtosis(values, fisher=True)),
    )
