"""CSV ingestion of prices and persistence of window batches."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd  # type: ignore[import-untyped]

from qganfinance.artifacts import read_csv, read_key_values, write_csv, write_key_values
from qganfinance.errors import ArtifactIOError, MissingFile, ParseError, ValidationError
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.series import NormStats, PipelineConfig, PriceSeries, WindowBatch

if TYPE_CHECKING:
    from numpy.typing import NDArray

logger = get_logger("data.io")

PRICE_COLUMNS = ["date", "close"]


def load_price_csv(path: str | Path) -> PriceSeries:
    """Load a `date,close` CSV into a validated PriceSeries.

    Args:
        path: UTF-8 CSV with mandatory header `date,close` and ISO-8601 dates.

    Returns:
        PriceSeries in file order.

    Raises:
        MissingFile: If the file does not exist.
        ParseError: If the header is wrong or a row does not parse (1-based data row).
        NonPositivePrice: If a close is <= 0.
        NonMonotoneDate: If dates are not strictly increasing.

    """
    csv_path = Path(path)
    if not csv_path.exists():
        raise MissingFile(csv_path)
    try:
        frame = pd.read_csv(csv_path, dtype=str, keep_default_na=False, comment="#", encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        msg = f"Could not read {csv_path}: {exc}"
        raise ArtifactIOError(msg) from exc
    except pd.errors.ParserError as exc:
        raise ParseError(0, str(exc)) from exc

    if [c.strip().lower() for c in frame.columns] != PRICE_COLUMNS:
        raise ParseError(0, f"expected header 'date,close', got {','.join(frame.columns)}")

    dates = pd.to_datetime(frame.iloc[:, 0].str.strip(), format="ISO8601", errors="coerce")
    closes = pd.to_numeric(frame.iloc[:, 1].str.strip(), errors="coerce")
    for row, (d, c) in enumerate(zip(dates, closes, strict=True), start=1):
        if pd.isna(d):
            raise ParseError(row, f"bad date {frame.iloc[row - 1, 0]!r}")
        if pd.isna(c) or not np.isfinite(c):
            raise ParseError(row, f"bad close {frame.iloc[row - 1, 1]!r}")

    series = PriceSeries(
        timestamps=dates.to_numpy().astype("datetime64[D]"),
        prices=closes.to_numpy(dtype=np.float64),
    )
    logger.info("Loaded %d prices from %s", len(series), csv_path)
    return series


def write_price_csv(series: PriceSeries, path: str | Path) -> Path:
    """Write a PriceSeries as `date,close`."""
    frame = pd.DataFrame(
        {
            "date": np.datetime_as_string(series.timestamps, unit="D"),
            "close": series.prices,
        },
    )
    return write_csv(frame, Path(path))


def batch_metadata(batch: WindowBatch) -> dict[str, Any]:
    """Key-value sidecar content for a window batch."""
    cfg = batch.config
    return {
        "mean": batch.norm_stats.mean,
        "std": batch.norm_stats.std,
        "delta": cfg.delta,
        "clip_bound": cfg.clip_bound,
        "window": cfg.window,
        "stride": cfg.stride,
        "source_length": batch.source_length,
        "num_windows": batch.num_windows,
    }


def write_window_batch(batch: WindowBatch, path: str | Path, meta: dict[str, Any] | None = None) -> tuple[Path, Path]:
    """Write one window per CSV row plus a `.meta` key-value sidecar."""
    csv_path = Path(path)
    columns = [f"x{i}" for i in range(batch.config.window)]
    write_csv(pd.DataFrame(batch.samples, columns=columns), csv_path, meta)
    meta_path = write_key_values(batch_metadata(batch), csv_path.with_suffix(".meta"))
    return csv_path, meta_path


def read_window_batch(path: str | Path) -> WindowBatch:
    """Read a batch written by `write_window_batch`."""
    csv_path = Path(path)
    sidecar = read_key_values(csv_path.with_suffix(".meta"))
    try:
        cfg = PipelineConfig(
            delta=float(sidecar["delta"]),
            clip_bound=float(sidecar["clip_bound"]),
            window=int(sidecar["window"]),
            stride=int(sidecar["stride"]),
        )
        stats = NormStats(mean=float(sidecar["mean"]), std=float(sidecar["std"]))
        source_length = int(sidecar.get("source_length", "-1"))
    except (KeyError, ValueError) as exc:
        msg = f"Malformed batch sidecar for {csv_path}: {exc}"
        raise ValidationError(msg) from exc
    samples: NDArray[np.float64] = read_csv(csv_path).to_numpy(dtype=np.float64)
    return WindowBatch(samples=samples.reshape(-1, cfg.window), norm_stats=stats, config=cfg, source_length=source_length)


def write_windows(samples: NDArray[np.float64], path: str | Path, meta: dict[str, Any] | None = None) -> Path:
    """Write a matrix of windows, one per row, as `x0,...,x{m-1}`."""
    matrix = np.asarray(samples, dtype=np.float64)
    columns = [f"x{i}" for i in range(matrix.shape[1])]
    return write_csv(pd.DataFrame(matrix, columns=columns), Path(path), meta)


def read_windows(path: str | Path) -> NDArray[np.float64]:
    """Read a window matrix written by `write_windows` or `write_window_batch`.

    Raises:
        ValidationError: If the columns are not `x0..x{m-1}`.

    """
    csv_path = Path(path)
    frame = read_csv(csv_path)
    expected = [f"x{i}" for i in range(len(frame.columns))]
    if list(frame.columns) != expected:
        msg = f"{csv_path} is not a window file: columns {list(frame.columns)[:4]}..."
        raise ValidationError(msg)
    return frame.to_numpy(dtype=np.float64)


def is_price_csv(path: str | Path) -> bool:
    """Return True when the first data line of a CSV is the `date,close` header."""
    csv_path = Path(path)
    if not csv_path.exists():
        raise MissingFile(csv_path)
    with csv_path.open(encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                return [c.strip().lower() for c in line.split(",")] == PRICE_COLUMNS
    return False
