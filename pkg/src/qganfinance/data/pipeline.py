"""Pre-processing of price data into [-1, 1] windows and its inverse.

Forward steps, applied in order by `preprocess`:
  (i)   normalization to zero mean and unit sample standard deviation
  (ii)  inverse Lambert-W transform (Gaussianization)
  (iii) clipping to [-c, c] followed by division by c
  (iv)  rolling window of length m and stride s
`postprocess` undoes (iii) -> (i) entry by entry on generated windows.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import NDArray

from qganfinance.data.lambert import lambert_degaussianize_array, lambert_gaussianize_array
from qganfinance.errors import OutOfRange, SeriesTooShort, TooShort, ValidationError, ZeroVariance
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.series import MIN_PRICES, NormStats, PipelineConfig, PriceSeries, ReturnSeries, WindowBatch, window_count

logger = get_logger("data.pipeline")


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """Return ln(S_{t+1} / S_t) for consecutive prices."""
    if len(prices) < MIN_PRICES:
        msg = "log returns need at least two prices"
        raise TooShort(msg)
    return ReturnSeries(values=np.log(prices.prices[1:] / prices.prices[:-1]))


def normalize(returns: ReturnSeries) -> tuple[ReturnSeries, NormStats]:
    """Standardize to sample mean 0 and sample standard deviation 1."""
    values = returns.values
    if len(values) < MIN_PRICES:
        msg = "normalization needs at least two values"
        raise TooShort(msg)
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1))
    if not std > 0:
        msg = "returns have zero sample variance"
        raise ZeroVariance(msg)
    return ReturnSeries(values=(values - mean) / std), NormStats(mean=mean, std=std)


def denormalize(values: NDArray[np.float64], stats: NormStats) -> NDArray[np.float64]:
    """Inverse of `normalize`."""
    return values * stats.std + stats.mean


def clip_and_scale(series: ReturnSeries, clip_bound: float) -> ReturnSeries:
    """Clip to [-c, c] and divide by c so the output lies in [-1, 1]."""
    if not clip_bound > 0:
        msg = f"clip_bound must be > 0, got {clip_bound!r}"
        raise ValidationError(msg)
    return ReturnSeries(values=np.clip(series.values, -clip_bound, clip_bound) / clip_bound)


def unscale(values: NDArray[np.float64], clip_bound: float) -> NDArray[np.float64]:
    """Inverse of the scaling half of `clip_and_scale` (clipped points stay saturated)."""
    return values * clip_bound


def rolling_window(series: ReturnSeries, window: int, stride: int) -> NDArray[np.float64]:
    """Return rows series[k*s : k*s + m] for k = 0 .. floor((T - m) / s)."""
    if window < 1 or stride < 1:
        msg = "window and stride must be positive"
        raise ValidationError(msg)
    if len(series) < window:
        msg = f"series of length {len(series)} is shorter than the window {window}"
        raise SeriesTooShort(msg)
    windows = sliding_window_view(series.values, window)[::stride]
    return np.ascontiguousarray(windows)


def preprocess(prices: PriceSeries, cfg: PipelineConfig) -> WindowBatch:
    """Run steps (i) -> (iv) on a price series."""
    returns = log_returns(prices)
    normalized, stats = normalize(returns)
    gaussian = ReturnSeries(values=lambert_gaussianize_array(normalized.values, cfg.delta))
    scaled = clip_and_scale(gaussian, cfg.clip_bound)
    clipped = int(np.count_nonzero(np.abs(gaussian.values) > cfg.clip_bound))
    if clipped:
        logger.info("Clipped %d of %d values at +/-%s", clipped, len(gaussian), cfg.clip_bound)
    samples = rolling_window(scaled, cfg.window, cfg.stride)
    logger.debug(
        "Preprocessed %d returns into %d windows (m=%d, s=%d)",
        len(scaled),
        window_count(len(scaled), cfg.window, cfg.stride),
        cfg.window,
        cfg.stride,
    )
    return WindowBatch(samples=samples, norm_stats=stats, config=cfg, source_length=len(scaled))


def postprocess(generated: NDArray[np.float64], stats: NormStats, cfg: PipelineConfig) -> NDArray[np.float64]:
    """Map generated values in [-1, 1] back to log returns.

    Each entry u becomes (degaussianize(u * c, delta)) * std + mean.

    Raises:
        OutOfRange: If an entry lies outside [-1, 1].

    """
    values = np.asarray(generated, dtype=np.float64)
    outside = np.argwhere(~(np.abs(values) <= 1.0))
    if outside.size:
        entry = tuple(int(i) for i in outside[0])
        raise OutOfRange(entry, float(values[entry]))
    gaussian = unscale(values, cfg.clip_bound)
    return denormalize(lambert_degaussianize_array(gaussian, cfg.delta), stats)


def return_windows(prices: PriceSeries, window: int, stride: int) -> NDArray[np.float64]:
    """Rolling windows of raw log returns, the reference side of every metric."""
    return rolling_window(log_returns(prices), window, stride)
