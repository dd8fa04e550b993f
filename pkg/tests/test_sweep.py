"""Tests for training grids over depth, bond dimension and seed."""

import numpy as np
import pandas as pd
import pytest

from qganfinance.critic.network import CriticConfig
from qganfinance.data.pipeline import preprocess
from qganfinance.schemas.circuit import CircuitSpec
from qganfinance.schemas.series import PipelineConfig, PriceSeries
from qganfinance.schemas.training import TrainConfig
from qganfinance.training.sweep import METRIC_COLUMNS, bond_label, summarize_sweep, train_sweep


def test_bond_label() -> None:
    """None stands for the exact backend."""
    assert bond_label(None) == "statevector"
    assert bond_label(8) == "8"


def test_train_sweep_grid(prices: PriceSeries, tiny_critic: CriticConfig) -> None:
    """Each (layers, bond, seed) point trains once and lands in its summary group."""
    batch = preprocess(prices, PipelineConfig(window=6, stride=3))
    cfg = TrainConfig(epochs=1, batch_size=4, critic_steps_per_gen_step=1, metrics_samples=8)
    runs, summary = train_sweep(batch, CircuitSpec(3, 1), tiny_critic, cfg, [1, 2], [None, 1], [0, 1])

    assert len(runs) == 2 * 2 * 2
    assert list(runs.columns) == ["layers", "bond", "seed", "epochs", *METRIC_COLUMNS]
    assert set(runs["epochs"]) == {1}
    assert np.all(np.isfinite(runs[METRIC_COLUMNS].to_numpy()))
    assert len(summary) == 4
    assert summary["runs"].tolist() == [2, 2, 2, 2]


def test_summarize_sweep_statistics() -> None:
    """Mean and sample standard deviation per group."""
    runs = pd.DataFrame(
        {
            "layers": [1, 1, 2],
            "bond": ["statevector", "statevector", "4"],
            "seed": [0, 1, 0],
            "epochs": [5, 5, 5],
            **{name: [1.0, 3.0, 2.0] for name in METRIC_COLUMNS},
        },
    )
    summary = summarize_sweep(runs)

    first = summary.iloc[0]
    assert first["EMD_mean"] == pytest.approx(2.0)
    assert first["EMD_std"] == pytest.approx(np.sqrt(2.0))
    assert np.isnan(summary.iloc[1]["EMD_std"])
    assert summary["runs"].tolist() == [2, 1]
