"""Market data ingestion and the pre/post-processing pipeline."""

from qganfinance.data.io import (
    is_price_csv,
    load_price_csv,
    read_window_batch,
    read_windows,
    write_price_csv,
    write_window_batch,
    write_windows,
)
from qganfinance.data.lambert import (
    lambert_degaussianize,
    lambert_degaussianize_array,
    lambert_gaussianize,
    lambert_gaussianize_array,
    lambert_w,
    lambert_w_array,
)
from qganfinance.data.pipeline import (
    clip_and_scale,
    log_returns,
    normalize,
    postprocess,
    preprocess,
    return_windows,
    rolling_window,
)

__all__ = [
    "clip_and_scale",
    "is_price_csv",
    "lambert_degaussianize",
    "lambert_degaussianize_array",
    "lambert_gaussianize",
    "lambert_gaussianize_array",
    "lambert_w",
    "lambert_w_array",
    "load_price_csv",
    "log_returns",
    "normalize",
    "postprocess",
    "preprocess",
    "read_window_batch",
    "read_windows",
    "return_windows",
    "rolling_window",
    "write_price_csv",
    "write_window_batch",
    "write_windows",
]
