"""Training grids over circuit depth, bond dimension and seed."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import replace

import pandas as pd  # type: ignore[import-untyped]

from qganfinance.critic.network import CriticConfig
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.circuit import CircuitSpec
from qganfinance.schemas.series import WindowBatch
from qganfinance.schemas.training import BackendKind, TrainConfig
from qganfinance.training.trainer import train

logger = get_logger("training.sweep")

METRIC_COLUMNS = ["EMD", "E_ACF_id", "E_ACF_abs", "E_Lev", "wasserstein_estimate"]
STATEVECTOR_LABEL = "statevector"


def bond_label(bond: int | None) -> str:
    """Column value naming the backend of one grid point."""
    return STATEVECTOR_LABEL if bond is None else str(bond)


def train_sweep(
    batch: WindowBatch,
    circuit: CircuitSpec,
    critic_cfg: CriticConfig,
    cfg: TrainConfig,
    layers_list: Sequence[int],
    bond_list: Sequence[int | None],
    seeds: Sequence[int],
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Train every (layers, bond, seed) combination and summarize the final metrics.

    A bond of None selects the statevector backend.

    Returns:
        (runs, summary): one row per run, and mean/std per (layers, bond)

    """
    records = []
    for n_layers in layers_list:
        spec = replace(circuit, n_layers=n_layers)
        for bond in bond_list:
            backend = BackendKind.STATEVECTOR if bond is None else BackendKind.MPS
            for seed in seeds:
                run_cfg = replace(cfg, backend=backend, max_bond=bond, seed=seed)
                logger.info("Sweep point: layers=%d bond=%s seed=%d", n_layers, bond_label(bond), seed)
                log = train(batch, spec, critic_cfg, run_cfg).log
                final = log.rows[-1]
                records.append(
                    {
                        "layers": n_layers,
                        "bond": bond_label(bond),
                        "seed": seed,
                        "epochs": final.epoch,
                        **{name: getattr(final, name) for name in METRIC_COLUMNS},
                    },
                )
    runs = pd.DataFrame.from_records(records, columns=["layers", "bond", "seed", "epochs", *METRIC_COLUMNS])
    return runs, summarize_sweep(runs)


def summarize_sweep(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean and sample standard deviation of every metric per (layers, bond)."""
    grouped = runs.groupby(["layers", "bond"], sort=False)[METRIC_COLUMNS]
    summary = grouped.agg(["mean", "std"])
    summary.columns = [f"{metric}_{stat}" for metric, stat in summary.columns]
    summary = summary.reset_index()
    summary.insert(2, "runs", grouped.size().to_numpy())
    return summary
