"""Schemas for training configuration and the per-epoch log."""

from __future__ import annotations

from dataclasses import astuple, dataclass, field, fields
from enum import Enum

import numpy as np
import pandas as pd  # type: ignore[import-untyped]

from qganfinance.errors import ValidationError

MIN_BATCH = 2


class BackendKind(str, Enum):
    """Generator simulation backend."""

    STATEVECTOR = "statevector"
    MPS = "mps"


@dataclass(frozen=True)
class AdamConfig:
    """Adam moment decay rates and denominator offset."""

    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters of the alternating WGAN-GP loop."""

    epochs: int = 100
    batch_size: int = 64
    critic_steps_per_gen_step: int = 5
    lambda_gp: float = 10.0
    learning_rate: float = 1e-3
    backend: BackendKind = BackendKind.STATEVECTOR
    max_bond: int | None = None
    seed: int = 0
    adam: AdamConfig = field(default_factory=AdamConfig)
    checkpoint_every: int = 100
    metrics_samples: int = 256
    tau_max: int | None = None

    def __post_init__(self) -> None:
        """Validate ranges and backend options."""
        object.__setattr__(self, "backend", BackendKind(self.backend))
        checks = [
            (self.epochs >= 1, "epochs must be >= 1"),
            (self.batch_size >= MIN_BATCH, f"batch_size must be >= {MIN_BATCH}"),
            (self.critic_steps_per_gen_step >= 1, "critic_steps_per_gen_step must be >= 1"),
            (self.lambda_gp >= 0, "lambda_gp must be >= 0"),
            (self.learning_rate > 0, "learning_rate must be > 0"),
            (self.checkpoint_every >= 1, "checkpoint_every must be >= 1"),
            (self.metrics_samples >= 1, "metrics_samples must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValidationError(msg)
        if self.backend is BackendKind.MPS and (self.max_bond is None or self.max_bond < 1):
            msg = "mps backend requires max_bond >= 1"
            raise ValidationError(msg)


@dataclass(frozen=True)
class TrainLogRow:
    """One epoch of training statistics."""

    epoch: int
    critic_loss: float
    generator_loss: float
    wasserstein_estimate: float
    E_ACF_id: float  # noqa: N815
    E_ACF_abs: float  # noqa: N815
    E_Lev: float  # noqa: N815
    EMD: float  # noqa: N815
    wall_time: float

    def is_finite(self) -> bool:
        """Return True when every numeric field is finite."""
        return bool(np.all(np.isfinite(np.asarray(astuple(self), dtype=np.float64))))


TRAIN_LOG_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(TrainLogRow))


@dataclass
class TrainLog:
    """Ordered per-epoch rows."""

    rows: list[TrainLogRow] = field(default_factory=list)

    def append(self, row: TrainLogRow) -> None:
        """Append one epoch."""
        self.rows.append(row)

    def __len__(self) -> int:
        """Return the number of logged epochs."""
        return len(self.rows)

    def to_frame(self) -> pd.DataFrame:
        """Return the log as a DataFrame with the canonical column order."""
        return pd.DataFrame([astuple(r) for r in self.rows], columns=list(TRAIN_LOG_COLUMNS))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> TrainLog:
        """Rebuild a log from a DataFrame written by `to_frame`."""
        rows = [
            TrainLogRow(
                epoch=int(rec["epoch"]),
                **{name: float(rec[name]) for name in TRAIN_LOG_COLUMNS if name != "epoch"},
            )
            for rec in frame.to_dict("records")
        ]
        return cls(rows=rows)
