"""Correlation estimators and the stylized-fact error metrics.

Samples are matrices whose rows are windows of log returns. Lagged pairs
(r_t, r_{t+tau}) are only formed inside a row. Each row gives one Pearson
correlation per lag and the curve value is the mean over rows, taken in a fixed
order. Rows whose pairs are constant carry no estimate and are left out of the
mean; a lag with no usable row is 0. Every row is demeaned on its own, so short
windows carry a bias of about -1/(m - tau).
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from numpy.typing import NDArray

from qganfinance.errors import EmptyInput, LengthMismatch, TooShort, ValidationError, ZeroVariance
from qganfinance.metrics.distributions import aligned_mad, distribution_summary, emd_1d
from qganfinance.schemas.metrics import AcfCurves, MetricsReport

MIN_POINTS = 2
CI_Z = 1.96


class Transform(str, Enum):
    """How a lagged pair is built from a series.

    IDENTITY pairs r_t with r_{t+tau}; ABSOLUTE pairs |r_t| with |r_{t+tau}|;
    SQUARE pairs |r_t|^2 with r_{t+tau} (leverage effect).
    """

    IDENTITY = "identity"
    ABSOLUTE = "absolute"
    SQUARE = "square"


def _pair(values: NDArray[np.float64], transform: Transform) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if transform is Transform.ABSOLUTE:
        return np.abs(values), np.abs(values)
    if transform is Transform.SQUARE:
        return values**2, values
    return values, values


def _pearson(x: NDArray[np.float64], y: NDArray[np.float64]) -> float | None:
    xc = x - np.mean(x)
    yc = y - np.mean(y)
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx <= 0 or syy <= 0:
        return None
    return float(np.clip(np.dot(xc, yc) / np.sqrt(sxx * syy), -1.0, 1.0))


def corr(x: NDArray[np.float64], y: NDArray[np.float64]) -> float:
    """Sample Pearson correlation.

    Raises:
        LengthMismatch: If lengths differ.
        TooShort: If fewer than two points.
        ZeroVariance: If either input is constant.

    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape:
        msg = f"corr needs equal lengths, got {a.shape} and {b.shape}"
        raise LengthMismatch(msg)
    if a.size < MIN_POINTS:
        msg = "corr needs at least two points"
        raise TooShort(msg)
    value = _pearson(a, b)
    if value is None:
        msg = "corr of a constant series is undefined"
        raise ZeroVariance(msg)
    return value


def autocorrelation(series: NDArray[np.float64], lag: int, transform: Transform | str = Transform.IDENTITY) -> float:
    """Correlation of the transformed series with itself `lag` steps later."""
    values = np.asarray(series, dtype=np.float64)
    if lag < 1 or len(values) <= lag + 1:
        msg = f"series of length {len(values)} is too short for lag {lag}"
        raise TooShort(msg)
    head, tail = _pair(values, Transform(transform))
    return corr(head[:-lag], tail[lag:])


def lagged_correlation(samples: NDArray[np.float64], lag: int, transform: Transform) -> float:
    """Mean over rows of the within-row correlation at one lag; 0 when no row defines it."""
    head, tail = _pair(samples, transform)
    if head.shape[1] - lag < MIN_POINTS:
        return 0.0
    values = [_pearson(x[:-lag], y[lag:]) for x, y in zip(head, tail, strict=True)]
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else 0.0


def _as_matrix(samples: NDArray[np.float64], name: str) -> NDArray[np.float64]:
    values = np.asarray(samples, dtype=np.float64)
    if values.ndim == 1:
        values = values[None, :]
    if values.ndim != 2 or values.size == 0:  # noqa: PLR2004
        msg = f"{name} samples must be a non-empty matrix"
        raise EmptyInput(msg)
    return values


def acf_curves(samples: NDArray[np.float64], tau_max: int) -> AcfCurves:
    """Linear, absolute and leverage correlations for lags 1..tau_max."""
    values = _as_matrix(samples, "acf")
    if not 1 <= tau_max < values.shape[1]:
        msg = f"tau_max must lie in [1, {values.shape[1] - 1}], got {tau_max}"
        raise ValidationError(msg)
    lags = range(1, tau_max + 1)
    return AcfCurves(
        linear=np.array([lagged_correlation(values, t, Transform.IDENTITY) for t in lags]),
        absolute=np.array([lagged_correlation(values, t, Transform.ABSOLUTE) for t in lags]),
        leverage=np.array([lagged_correlation(values, t, Transform.SQUARE) for t in lags]),
    )


def ci_halfwidth(n_effective: int) -> float:
    """Return 1.96 / sqrt(n), the white-noise band of a sample autocorrelation."""
    if n_effective < MIN_POINTS:
        msg = f"n_effective must be >= 2, got {n_effective}"
        raise TooShort(msg)
    return CI_Z / float(np.sqrt(n_effective))


def lag_ci(rows: int, window: int, tau_max: int) -> NDArray[np.float64]:
    """Per-lag band of a row-averaged estimate: 1.96 / sqrt(rows * (window - tau))."""
    return np.array([ci_halfwidth(max(MIN_POINTS, rows * (window - t))) for t in range(1, tau_max + 1)])


def _rms(values: NDArray[np.float64]) -> float:
    return float(np.sqrt(np.mean(values**2)))


def stylized_fact_errors(reference: NDArray[np.float64], generated: NDArray[np.float64], tau_max: int) -> MetricsReport:
    """Compare generated windows with reference windows.

    E_ACF_id is the RMS of the generated linear correlations over lags 1..tau_max;
    E_ACF_abs and E_Lev are RMS differences between reference and generated
    absolute and leverage curves. EMD is the 1-D Wasserstein-1 distance between
    the values at lags 0..tau_max of every row, pooled.
    """
    ref = _as_matrix(reference, "reference")
    gen = _as_matrix(generated, "generated")
    window = min(ref.shape[1], gen.shape[1])
    if tau_max >= window:
        msg = f"tau_max {tau_max} must be smaller than the window length {window}"
        raise ValidationError(msg)
    ref_curves = acf_curves(ref, tau_max)
    gen_curves = acf_curves(gen, tau_max)
    head_ref = ref[:, : tau_max + 1]
    head_gen = gen[:, : tau_max + 1]
    return MetricsReport(
        emd=emd_1d(head_ref.ravel(), head_gen.ravel()),
        e_acf_id=_rms(gen_curves.linear),
        e_acf_abs=_rms(ref_curves.absolute - gen_curves.absolute),
        e_lev=_rms(ref_curves.leverage - gen_curves.leverage),
        tau_max=tau_max,
        reference_curves=ref_curves,
        generated_curves=gen_curves,
        ci_halfwidth=ci_halfwidth(max(MIN_POINTS, gen.shape[0] * (gen.shape[1] - tau_max))),
        aligned_mad=aligned_mad(head_ref, head_gen),
        reference_summary=distribution_summary(ref.ravel()),
        generated_summary=distribution_summary(gen.ravel()),
    )
