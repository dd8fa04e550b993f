"""Tests for the pre/post-processing pipeline and its file formats."""

from pathlib import Path

import numpy as np
import pytest

from qganfinance.artifacts import read_meta
from qganfinance.data.io import load_price_csv, read_window_batch, read_windows, write_window_batch, write_windows
from qganfinance.data.pipeline import (
    clip_and_scale,
    log_returns,
    normalize,
    postprocess,
    preprocess,
    return_windows,
    rolling_window,
)
from qganfinance.data.synthetic import geometric_walk, student_t_returns
from qganfinance.errors import (
    MissingFile,
    NonMonotoneDate,
    NonPositivePrice,
    OutOfRange,
    ParseError,
    SeriesTooShort,
    ValidationError,
    ZeroVariance,
)
from qganfinance.schemas.series import PipelineConfig, PriceSeries, ReturnSeries, window_count


def _series(values: list[float]) -> PriceSeries:
    dates = np.datetime64("2024-01-01") + np.arange(len(values))
    return PriceSeries(timestamps=dates, prices=np.array(values, dtype=np.float64))


def test_log_returns_of_doubling_prices() -> None:
    """Doubling prices give ln 2 returns."""
    returns = log_returns(_series([1.0, 2.0, 4.0, 8.0]))

    np.testing.assert_allclose(returns.values, np.log(2.0) * np.ones(3), rtol=1e-15)


def test_price_series_validation() -> None:
    """Non-positive prices and non-increasing dates are rejected with their row."""
    with pytest.raises(NonPositivePrice) as bad_price:
        _series([1.0, 0.0, 2.0])
    assert bad_price.value.row == 2

    dates = np.array(["2024-01-01", "2024-01-03", "2024-01-02"], dtype="datetime64[D]")
    with pytest.raises(NonMonotoneDate) as bad_date:
        PriceSeries(timestamps=dates, prices=np.ones(3))
    assert bad_date.value.row == 3


def test_normalize_moments_and_zero_variance() -> None:
    """Normalized returns have mean 0 and sample std 1; constants are rejected."""
    values = np.random.default_rng(0).normal(0.01, 0.2, size=500)
    normalized, stats = normalize(ReturnSeries(values))

    assert abs(np.mean(normalized.values)) < 1e-12
    assert np.std(normalized.values, ddof=1) == pytest.approx(1.0, abs=1e-12)
    assert stats.mean == pytest.approx(np.mean(values))
    with pytest.raises(ZeroVariance):
        normalize(ReturnSeries(np.full(10, 0.3)))


def test_clip_and_scale_bounds() -> None:
    """Values beyond +/-c saturate at +/-1."""
    scaled = clip_and_scale(ReturnSeries(np.array([-9.0, -2.0, 0.0, 2.0, 9.0])), 4.0)

    np.testing.assert_array_equal(scaled.values, [-1.0, -0.5, 0.0, 0.5, 1.0])


def test_rolling_window_rows_and_count() -> None:
    """Rows follow k*s offsets and the count formula."""
    series = ReturnSeries(np.arange(10, dtype=np.float64))
    windows = rolling_window(series, 4, 3)

    assert windows.shape == (window_count(10, 4, 3), 4) == (3, 4)
    np.testing.assert_array_equal(windows[1], [3.0, 4.0, 5.0, 6.0])
    with pytest.raises(SeriesTooShort):
        rolling_window(series, 11, 1)


def test_pipeline_config_validation() -> None:
    """Stride outside [1, window] and negative delta are rejected."""
    with pytest.raises(ValidationError):
        PipelineConfig(window=4, stride=5)
    with pytest.raises(ValidationError):
        PipelineConfig(delta=-0.1)


def test_preprocess_produces_unit_range_windows(prices: PriceSeries) -> None:
    """Every preprocessed entry lies in [-1, 1] and the window count matches."""
    cfg = PipelineConfig(window=12, stride=3)
    batch = preprocess(prices, cfg)

    assert batch.num_windows == (len(prices) - 1 - 12) // 3 + 1
    assert np.all(np.abs(batch.samples) <= 1.0)


def test_postprocess_inverts_preprocess_on_unclipped_points() -> None:
    """postprocess(preprocess(x)) recovers the log returns wherever nothing was clipped."""
    for seed in range(20):
        rng = np.random.default_rng(seed)
        series = geometric_walk(student_t_returns(300, rng))
        cfg = PipelineConfig(window=10, stride=10)
        batch = preprocess(series, cfg)
        recovered = postprocess(batch.samples, batch.norm_stats, cfg)
        expected = return_windows(series, cfg.window, cfg.stride)
        unclipped = np.abs(batch.samples) < 1.0

        np.testing.assert_allclose(recovered[unclipped], expected[unclipped], rtol=1e-9, atol=1e-12)


def test_postprocess_rejects_out_of_range() -> None:
    """Generated values outside [-1, 1] raise OutOfRange with the entry."""
    cfg = PipelineConfig(window=2, stride=1)
    batch = preprocess(_series([1.0, 1.1, 0.9, 1.2, 1.0]), cfg)
    with pytest.raises(OutOfRange) as info:
        postprocess(np.array([[0.2, 1.5]]), batch.norm_stats, cfg)
    assert info.value.entry == (0, 1)


def test_load_price_csv_round_trip(price_csv: Path, prices: PriceSeries) -> None:
    """A written price CSV loads back unchanged."""
    loaded = load_price_csv(price_csv)

    np.testing.assert_array_equal(loaded.timestamps, prices.timestamps)
    np.testing.assert_allclose(loaded.prices, prices.prices, rtol=1e-15)


def test_load_price_csv_errors(tmp_path: Path) -> None:
    """Missing files, wrong headers and bad rows are reported precisely."""
    with pytest.raises(MissingFile):
        load_price_csv(tmp_path / "absent.csv")

    wrong_header = tmp_path / "header.csv"
    wrong_header.write_text("day,price\n2024-01-01,1.0\n", encoding="utf-8")
    with pytest.raises(ParseError) as header_error:
        load_price_csv(wrong_header)
    assert header_error.value.row == 0

    bad_row = tmp_path / "row.csv"
    bad_row.write_text("date,close\n2024-01-01,1.0\n2024-01-02,abc\n", encoding="utf-8")
    with pytest.raises(ParseError) as row_error:
        load_price_csv(bad_row)
    assert row_error.value.row == 2


def test_window_batch_file_round_trip(tmp_path: Path, prices: PriceSeries) -> None:
    """Batch CSV plus sidecar reproduce the batch bit for bit."""
    batch = preprocess(prices, PipelineConfig(window=8, stride=4))
    csv_path, meta_path = write_window_batch(batch, tmp_path / "batch.csv", {"seed": 3})
    loaded = read_window_batch(csv_path)

    assert meta_path.exists()
    assert read_meta(csv_path)["seed"] == "3"
    assert loaded.norm_stats == batch.norm_stats
    assert loaded.config == batch.config
    np.testing.assert_array_equal(loaded.samples, batch.samples)


def test_empty_window_file_keeps_header(tmp_path: Path) -> None:
    """A zero-row window file still parses to a (0, m) matrix."""
    path = write_windows(np.empty((0, 4)), tmp_path / "empty.csv", {"seed": 0})

    assert read_windows(path).shape == (0, 4)
