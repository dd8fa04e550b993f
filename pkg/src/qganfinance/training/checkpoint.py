"""Bit-exact training checkpoints.

A checkpoint directory holds:
  generator.csv   kind,index,value rows for thetas then lambdas
  critic.npz      named critic arrays
  optimizer.npz   both Adam states
  train_log.csv   log rows up to the checkpoint epoch
  manifest.json   epoch, seed, config echo and normalization statistics
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd  # type: ignore[import-untyped]

from qganfinance.artifacts import read_csv, read_json, write_csv, write_json
from qganfinance.critic.network import CriticConfig, CriticParameters, load_parameters, save_parameters
from qganfinance.errors import ArtifactIOError, CheckpointMismatch, MissingFile
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.circuit import ParameterSet, ParamKind
from qganfinance.schemas.training import TrainLog
from qganfinance.training.adam import AdamState

logger = get_logger("training.checkpoint")

CHECKPOINT_DIR = "checkpoints"
GENERATOR_FILE = "generator.csv"
CRITIC_FILE = "critic.npz"
OPTIMIZER_FILE = "optimizer.npz"
LOG_FILE = "train_log.csv"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class Checkpoint:
    """Everything needed to continue training after `epoch`."""

    epoch: int
    generator: ParameterSet
    critic: CriticParameters
    generator_adam: AdamState
    critic_adam: AdamState
    log: TrainLog
    manifest: dict[str, Any]


def write_generator_csv(params: ParameterSet, path: Path, meta: dict[str, Any] | None = None) -> Path:
    """Write generator parameters as `kind,index,value`."""
    frame = pd.DataFrame(
        {
            "kind": [ParamKind.THETA.value] * len(params.thetas) + [ParamKind.LAMBDA.value] * len(params.lambdas),
            "index": np.concatenate([np.arange(len(params.thetas)), np.arange(len(params.lambdas))]),
            "value": params.flat(),
        },
    )
    return write_csv(frame, path, meta)


def read_generator_csv(path: Path) -> ParameterSet:
    """Read parameters written by `write_generator_csv`."""
    frame = read_csv(path)
    if list(frame.columns) != ["kind", "index", "value"]:
        msg = f"{path} is not a generator parameter file"
        raise CheckpointMismatch(msg)
    thetas = frame[frame["kind"] == ParamKind.THETA.value].sort_values("index")["value"].to_numpy(dtype=np.float64)
    lambdas = frame[frame["kind"] == ParamKind.LAMBDA.value].sort_values("index")["value"].to_numpy(dtype=np.float64)
    return ParameterSet(thetas=thetas, lambdas=lambdas)


def checkpoint_path(run_dir: Path, epoch: int) -> Path:
    """Directory of the checkpoint written after `epoch`."""
    return run_dir / CHECKPOINT_DIR / f"epoch_{epoch:06d}"


def save_checkpoint(run_dir: Path, checkpoint: Checkpoint, meta: dict[str, Any]) -> Path:
    """Write a checkpoint directory and return its path."""
    target = checkpoint_path(run_dir, checkpoint.epoch)
    target.mkdir(parents=True, exist_ok=True)
    write_generator_csv(checkpoint.generator, target / GENERATOR_FILE, meta)
    save_parameters(checkpoint.critic, target / CRITIC_FILE)
    try:
        with (target / OPTIMIZER_FILE).open("wb") as f:
            np.savez(
                f,
                generator_m=checkpoint.generator_adam.m,
                generator_v=checkpoint.generator_adam.v,
                generator_step=np.array(checkpoint.generator_adam.step),
                critic_m=checkpoint.critic_adam.m,
                critic_v=checkpoint.critic_adam.v,
                critic_step=np.array(checkpoint.critic_adam.step),
            )
    except OSError as exc:
        msg = f"Could not write {target / OPTIMIZER_FILE}: {exc}"
        raise ArtifactIOError(msg) from exc
    write_csv(checkpoint.log.to_frame(), target / LOG_FILE, meta)
    write_json({**checkpoint.manifest, "epoch": checkpoint.epoch}, target / MANIFEST_FILE, meta)
    logger.info("Checkpoint written: epoch=%d path=%s", checkpoint.epoch, target)
    return target


def latest_checkpoint(run_dir: Path) -> Path | None:
    """Return the newest complete checkpoint directory, if any."""
    root = run_dir / CHECKPOINT_DIR
    if not root.is_dir():
        return None
    complete = [p for p in sorted(root.glob("epoch_*")) if (p / MANIFEST_FILE).exists()]
    return complete[-1] if complete else None


def load_checkpoint(path: Path, critic_config: CriticConfig | None = None) -> Checkpoint:
    """Read a checkpoint directory.

    Raises:
        MissingFile: If a component file is absent.
        CheckpointMismatch: If the critic does not match `critic_config`.

    """
    if not path.is_dir():
        raise MissingFile(path)
    document = read_json(path / MANIFEST_FILE)
    manifest = {k: v for k, v in document.items() if k != "provenance"}
    critic = load_parameters(path / CRITIC_FILE)
    if critic_config is not None and not critic.matches(critic_config):
        msg = f"critic checkpoint in {path} does not match the configured architecture"
        raise CheckpointMismatch(msg)
    optimizer = path / OPTIMIZER_FILE
    if not optimizer.exists():
        raise MissingFile(optimizer)
    with np.load(optimizer, allow_pickle=False) as data:
        generator_adam = AdamState(m=data["generator_m"].copy(), v=data["generator_v"].copy(), step=int(data["generator_step"]))
        critic_adam = AdamState(m=data["critic_m"].copy(), v=data["critic_v"].copy(), step=int(data["critic_step"]))
    log = TrainLog.from_frame(read_csv(path / LOG_FILE))
    return Checkpoint(
        epoch=int(manifest["epoch"]),
        generator=read_generator_csv(path / GENERATOR_FILE),
        critic=critic,
        generator_adam=generator_adam,
        critic_adam=critic_adam,
        log=log,
        manifest=manifest,
    )
