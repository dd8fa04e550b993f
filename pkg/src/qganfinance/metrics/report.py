"""Serialization of metric reports: JSON summary plus plot-ready CSVs."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd  # type: ignore[import-untyped]

from qganfinance.artifacts import write_csv, write_json
from qganfinance.logging_utils import get_logger
from qganfinance.metrics.distributions import pdf_histogram, qq_points
from qganfinance.metrics.stylized_facts import lag_ci

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from qganfinance.schemas.metrics import AcfCurves, MetricsReport

logger = get_logger("metrics.report")

# Best-of-5 values reported for four published configurations; kept for comparison only.
REFERENCE_TARGETS: dict[str, dict[str, float]] = {
    "statevector_10q_8l": {"EMD": 2.4e-4, "E_ACF_id": 7.8e-4, "E_ACF_abs": 0.15, "E_Lev": 4.9e-3},
    "statevector_10q_4l_ring": {"EMD": 5e-4, "E_ACF_id": 3.6e-4, "E_ACF_abs": 0.17, "E_Lev": 7.1e-3},
    "mps_10q_18l_chi32": {"EMD": 3.1e-4, "E_ACF_id": 3.9e-4, "E_ACF_abs": 0.29, "E_Lev": 2.8e-2},
    "mps_20q_6l_chi70": {"EMD": 4.2e-3, "E_ACF_id": 1.1e-3, "E_ACF_abs": 0.99, "E_Lev": 4.4e-2},
}

ACF_COLUMNS = ["series", "lag", "linear", "absolute", "leverage", "ci"]


def report_to_dict(report: MetricsReport) -> dict[str, Any]:
    """Flatten a report into JSON-safe scalars and lists."""

    def curves(c: AcfCurves) -> dict[str, list[float]]:
        return {"linear": c.linear.tolist(), "absolute": c.absolute.tolist(), "leverage": c.leverage.tolist()}

    payload: dict[str, Any] = {
        "EMD": report.emd,
        "E_ACF_id": report.e_acf_id,
        "E_ACF_abs": report.e_acf_abs,
        "E_Lev": report.e_lev,
        "aligned_mad": report.aligned_mad,
        "tau_max": report.tau_max,
        "ci_halfwidth": report.ci_halfwidth,
        "acf": {"reference": curves(report.reference_curves), "generated": curves(report.generated_curves)},
        "reference_targets": REFERENCE_TARGETS,
    }
    if report.reference_summary is not None:
        payload["reference_summary"] = asdict(report.reference_summary)
    if report.generated_summary is not None:
        payload["generated_summary"] = asdict(report.generated_summary)
    payload.update(report.extra)
    return payload


def acf_frame(report: MetricsReport, rows: int, window: int) -> pd.DataFrame:
    """Per-lag curves of both sides with the white-noise band."""
    lags = np.arange(1, report.tau_max + 1)
    band = lag_ci(rows, window, report.tau_max)
    frames = [
        pd.DataFrame(
            {
                "series": name,
                "lag": lags,
                "linear": c.linear,
                "absolute": c.absolute,
                "leverage": c.leverage,
                "ci": band,
            },
        )
        for name, c in (("reference", report.reference_curves), ("generated", report.generated_curves))
    ]
    return pd.concat(frames, ignore_index=True)[ACF_COLUMNS]


def qq_frame(reference: NDArray[np.float64], generated: NDArray[np.float64], count: int) -> pd.DataFrame:
    """Paired quantiles of pooled reference and generated values."""
    points = qq_points(reference.ravel(), generated.ravel(), count)
    return pd.DataFrame({"level": np.arange(1, count + 1) / (count + 1), "reference": points[:, 0], "generated": points[:, 1]})


def pdf_frame(reference: NDArray[np.float64], generated: NDArray[np.float64], bins: int) -> pd.DataFrame:
    """Histograms of both sides over common bin edges."""
    pooled = np.concatenate([reference.ravel(), generated.ravel()])
    value_range = (float(pooled.min()), float(pooled.max()))
    if value_range[0] == value_range[1]:
        value_range = (value_range[0] - 0.5, value_range[1] + 0.5)
    frames = []
    for name, values in (("reference", reference), ("generated", generated)):
        edges, densities = pdf_histogram(values.ravel(), bins, value_range)
        frames.append(pd.DataFrame({"series": name, "bin_left": edges[:-1], "bin_right": edges[1:], "density": densities}))
    return pd.concat(frames, ignore_index=True)


def write_report(
    report: MetricsReport,
    reference: NDArray[np.float64],
    generated: NDArray[np.float64],
    out_dir: Path,
    meta: dict[str, Any],
    qq_count: int = 99,
    pdf_bins: int = 50,
) -> dict[str, Path]:
    """Write report.json, acf.csv, qq.csv and pdf.csv into `out_dir`."""
    ref = np.atleast_2d(reference)
    gen = np.atleast_2d(generated)
    paths = {
        "report": write_json(report_to_dict(report), out_dir / "report.json", meta),
        "acf": write_csv(acf_frame(report, gen.shape[0], gen.shape[1]), out_dir / "acf.csv", meta),
        "qq": write_csv(qq_frame(ref, gen, qq_count), out_dir / "qq.csv", meta),
        "pdf": write_csv(pdf_frame(ref, gen, pdf_bins), out_dir / "pdf.csv", meta),
    }
    logger.info(
        "Metrics: EMD=%.3e E_ACF_id=%.3e E_ACF_abs=%.3e E_Lev=%.3e (tau_max=%d)",
        report.emd,
        report.e_acf_id,
        report.e_acf_abs,
        report.e_lev,
        report.tau_max,
    )
    return paths
