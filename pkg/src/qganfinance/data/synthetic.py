"""Seeded synthetic price paths for tests, demos and desk-scale experiments."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from qganfinance.schemas.series import PriceSeries


def student_t_returns(length: int, rng: np.random.Generator, dof: float = 3.0, scale: float = 0.01) -> NDArray[np.float64]:
    """Draw i.i.d. Student-t log returns rescaled to unit variance times `scale`."""
    draws = rng.standard_t(dof, size=length)
    if dof > 2:  # noqa: PLR2004
        draws = draws / np.sqrt(dof / (dof - 2.0))
    return scale * draws


def garch11_returns(
    length: int,
    rng: np.random.Generator,
    omega: float = 1e-6,
    alpha: float = 0.08,
    beta: float = 0.9,
    dof: float = 5.0,
) -> NDArray[np.float64]:
    """Draw GARCH(1,1) log returns with standardized Student-t innovations.

    Volatility clustering shows up as positive autocorrelation of |r|.
    """
    shocks = rng.standard_t(dof, size=length) / np.sqrt(dof / (dof - 2.0))
    out = np.empty(length)
    variance = omega / max(1.0 - alpha - beta, 1e-6)
    for t in range(length):
        out[t] = np.sqrt(variance) * shocks[t]
        variance = omega + alpha * out[t] ** 2 + beta * variance
    return out


def geometric_walk(returns: NDArray[np.float64], start_price: float = 100.0, start_date: str = "2000-01-03") -> PriceSeries:
    """Turn log returns into a business-day price path starting at `start_price`."""
    prices = start_price * np.exp(np.concatenate([[0.0], np.cumsum(returns)]))
    dates = np.busday_offset(np.datetime64(start_date, "D"), np.arange(len(prices)), roll="forward")
    return PriceSeries(timestamps=dates, prices=prices)
