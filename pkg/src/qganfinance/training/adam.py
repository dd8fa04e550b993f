"""Adam with bias-corrected moments on flat parameter vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from qganfinance.errors import LengthMismatch
from qganfinance.schemas.training import AdamConfig


@dataclass(frozen=True)
class AdamState:
    """First and second moment estimates plus the step counter."""

    m: NDArray[np.float64]
    v: NDArray[np.float64]
    step: int = 0

    @classmethod
    def zeros(cls, size: int) -> AdamState:
        """Fresh state for `size` parameters."""
        return cls(m=np.zeros(size), v=np.zeros(size), step=0)


def adam_update(
    state: AdamState,
    grads: NDArray[np.float64],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps_hat: float = 1e-8,
) -> tuple[AdamState, NDArray[np.float64]]:
    """Advance the moments by one descent step.

    Args:
        state: Current moments
        grads: Gradient of the loss being minimized
        lr: Learning rate
        beta1: First-moment decay
        beta2: Second-moment decay
        eps_hat: Denominator offset

    Returns:
        (new state, parameter increment -lr * m_hat / (sqrt(v_hat) + eps_hat))

    """
    g = np.asarray(grads, dtype=np.float64)
    if g.shape != state.m.shape:
        msg = f"gradient of shape {g.shape} does not match Adam state {state.m.shape}"
        raise LengthMismatch(msg)
    step = state.step + 1
    m = beta1 * state.m + (1.0 - beta1) * g
    v = beta2 * state.v + (1.0 - beta2) * g * g
    m_hat = m / (1.0 - beta1**step)
    v_hat = v / (1.0 - beta2**step)
    delta = -lr * m_hat / (np.sqrt(v_hat) + eps_hat)
    return AdamState(m=m, v=v, step=step), delta


def adam_step(
    state: AdamState,
    params: NDArray[np.float64],
    grads: NDArray[np.float64],
    lr: float,
    cfg: AdamConfig,
) -> tuple[AdamState, NDArray[np.float64]]:
    """Apply one descent step and return (new state, new parameters)."""
    new_state, delta = adam_update(state, grads, lr, cfg.beta1, cfg.beta2, cfg.eps_hat)
    return new_state, params + delta
