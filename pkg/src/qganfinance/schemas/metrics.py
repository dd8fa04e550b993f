"""Schemas for stylized-fact reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class AcfCurves:
    """Mean per-lag correlations for lags 1..tau_max."""

    linear: NDArray[np.float64]
    absolute: NDArray[np.float64]
    leverage: NDArray[np.float64]


@dataclass(frozen=True)
class DistributionSummary:
    """Descriptive moments of a pooled sample."""

    mean: float
    std: float
    skewness: float
    excess_kurtosis: float


@dataclass(frozen=True)
class MetricsReport:
    """The four stylized-fact metrics with the curves behind them."""

    emd: float
    e_acf_id: float
    e_acf_abs: float
    e_lev: float
    tau_max: int
    reference_curves: AcfCurves
    generated_curves: AcfCurves
    ci_halfwidth: float
    aligned_mad: float = float("nan")
    reference_summary: DistributionSummary | None = None
    generated_summary: DistributionSummary | None = None
    extra: dict[str, Any] = field(default_factory=dict)
