"""Lambert W on the non-negative reals and the heavy-tail Lambert-W transform pair.

The principal branch is evaluated with Halley's method started from
ln(1 + x), which is within a factor of two of W(x) for every x >= 0.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qganfinance.errors import NegativeArgument

MAX_ITERATIONS = 50
RELATIVE_TOLERANCE = 1e-14


def lambert_w_array(x: ArrayLike) -> NDArray[np.float64]:
    """Evaluate W on an array of non-negative arguments.

    Args:
        x: Values >= 0.

    Returns:
        Array of w >= 0 with w * exp(w) = x.

    Raises:
        NegativeArgument: If any entry is negative or NaN.

    """
    z = np.asarray(x, dtype=np.float64)
    if np.any(~(z >= 0)):
        msg = "lambert_w is defined here only for x >= 0"
        raise NegativeArgument(msg)

    w = np.log1p(z)
    active = np.ones(z.shape, dtype=bool)
    for _ in range(MAX_ITERATIONS):
        if not active.any():
            break
        wa = w[active]
        ew = np.exp(wa)
        f = wa * ew - z[active]
        wp1 = wa + 1.0
        # Halley step for f(w) = w e^w - x
        dw = f / (ew * wp1 - (wa + 2.0) * f / (2.0 * wp1))
        w[active] = wa - dw
        done = np.abs(dw) <= RELATIVE_TOLERANCE * np.abs(w[active])
        idx = np.flatnonzero(active)
        active[idx[done | (dw == 0.0)]] = False
    return w


def lambert_w(x: float) -> float:
    """Evaluate the principal branch W(x) for a scalar x >= 0."""
    return float(lambert_w_array(np.array([x]))[0])


def lambert_gaussianize_array(v: ArrayLike, delta: float) -> NDArray[np.float64]:
    """Map heavy-tailed values toward Gaussianity: sgn(v) * sqrt(W(delta v^2) / delta)."""
    values = np.asarray(v, dtype=np.float64)
    if delta < 0:
        msg = f"delta must be >= 0, got {delta!r}"
        raise NegativeArgument(msg)
    if delta == 0:
        return values.copy()
    magnitude = np.sqrt(lambert_w_array(delta * values * values) / delta)
    return np.sign(values) * magnitude


def lambert_degaussianize_array(w: ArrayLike, delta: float) -> NDArray[np.float64]:
    """Inverse transform: w * exp(delta / 2 * w^2)."""
    values = np.asarray(w, dtype=np.float64)
    if delta < 0:
        msg = f"delta must be >= 0, got {delta!r}"
        raise NegativeArgument(msg)
    return values * np.exp(0.5 * delta * values * values)


def lambert_gaussianize(v: float, delta: float) -> float:
    """Scalar form of `lambert_gaussianize_array`."""
    return float(lambert_gaussianize_array(np.array([v]), delta)[0])


def lambert_degaussianize(w: float, delta: float) -> float:
    """Scalar form of `lambert_degaussianize_array`."""
    return float(lambert_degaussianize_array(np.array([w]), delta)[0])
