"""Run directories: starting, resuming and sampling from a trained generator.

Layout of `<runs_dir>/<hash>-s<seed>/`:
  config.json       the resolved run config
  train_log.csv     one row per epoch
  timings.csv       per-epoch wall time, kept apart from the log
  checkpoints/      see training.checkpoint
  report/           final report.json, acf.csv, qq.csv, pdf.csv
  run.log           package log records of every invocation on this run
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd  # type: ignore[import-untyped]
from numpy.typing import NDArray

from qganfinance.artifacts import file_digest, provenance, read_csv, read_json, write_csv
from qganfinance.circuit.ansatz import sample_noise_batch
from qganfinance.config import CONFIG_FILE, RunConfig, load_config, save_config
from qganfinance.data.io import read_window_batch
from qganfinance.data.pipeline import postprocess
from qganfinance.errors import CheckpointMismatch, ConfigError, MissingFile, NonFiniteLoss
from qganfinance.logging_utils import get_logger, run_log
from qganfinance.metrics.report import write_report
from qganfinance.schemas.series import NormStats, WindowBatch
from qganfinance.training.checkpoint import GENERATOR_FILE, MANIFEST_FILE, latest_checkpoint, load_checkpoint, read_generator_csv
from qganfinance.training.seeding import Stream, substream
from qganfinance.training.trainer import TrainResult, evaluate_generator, make_backend, train

logger = get_logger("training.runs")

LOG_FILE = "train_log.csv"
TIMINGS_FILE = "timings.csv"
REPORT_DIR = "report"


def run_meta(config: RunConfig, **extra: object) -> dict[str, Any]:
    """Provenance header for artifacts of this run."""
    return provenance(config.config_hash(), config.seed, **extra)


def run_manifest(config: RunConfig, batch: WindowBatch) -> dict[str, Any]:
    """Manifest fields needed to sample from a checkpoint without the batch file."""
    return {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "config": config.to_dict(),
        "norm_stats": {"mean": batch.norm_stats.mean, "std": batch.norm_stats.std},
    }


def _check_batch(config: RunConfig, batch: WindowBatch) -> None:
    expected = config.pipeline_config()
    if batch.config != expected:
        msg = f"batch {config.batch_path} was preprocessed with {batch.config}, config asks for {expected}"
        raise ConfigError(msg)


def _write_timings(run_dir: Path, result: TrainResult, first_epoch: int, meta: dict[str, Any]) -> None:
    path = run_dir / TIMINGS_FILE
    frame = pd.DataFrame(result.timings, columns=["epoch", "wall_time"])
    if path.exists():
        previous = read_csv(path)
        frame = pd.concat([previous[previous["epoch"] < first_epoch], frame], ignore_index=True)
    write_csv(frame, path, meta)


def run_training(config: RunConfig, *, resume: bool = False) -> tuple[Path, TrainResult]:
    """Train per `config` inside its run directory.

    Args:
        config: Validated run config
        resume: Continue from the newest checkpoint when one exists

    Returns:
        (run directory, TrainResult)

    Raises:
        WindowMismatch: If 2 * n_qubits differs from the window.
        CheckpointMismatch: If the checkpoint belongs to another config.
        NonFiniteLoss: If training diverges; earlier checkpoints stay on disk.

    """
    config.check(for_training=True)
    batch = read_window_batch(config.batch_path)
    _check_batch(config, batch)
    run_dir = config.run_dir()
    with run_log(run_dir):
        return run_dir, _run_in(run_dir, config, batch, resume=resume)


def _run_in(run_dir: Path, config: RunConfig, batch: WindowBatch, *, resume: bool) -> TrainResult:
    meta = run_meta(config)
    save_config(config.absolute(), run_dir / CONFIG_FILE, meta)

    circuit, critic_cfg, cfg = config.circuit_spec(), config.critic_config(), config.train_config()
    start = None
    if resume:
        latest = latest_checkpoint(run_dir)
        if latest is not None:
            start = load_checkpoint(latest, critic_cfg)
            if start.manifest.get("config_hash") != config.config_hash():
                msg = f"checkpoint {latest} was written by config {start.manifest.get('config_hash')}"
                raise CheckpointMismatch(msg)
            logger.info("Resuming %s from epoch %d", run_dir, start.epoch)
        else:
            logger.info("No checkpoint in %s; starting from scratch", run_dir)

    try:
        result = train(batch, circuit, critic_cfg, cfg, run_dir=run_dir, start=start, manifest=run_manifest(config, batch), meta=meta)
    except NonFiniteLoss:
        logger.exception("Training diverged; last good checkpoint: %s", latest_checkpoint(run_dir))
        raise

    write_csv(result.log.to_frame(), run_dir / LOG_FILE, meta)
    _write_timings(run_dir, result, (start.epoch if start else 0) + 1, meta)

    reference = postprocess(batch.samples, batch.norm_stats, batch.config)
    report, generated = evaluate_generator(circuit, result.generator, make_backend(cfg), batch, reference, cfg, cfg.epochs)
    write_report(report, reference, generated, run_dir / REPORT_DIR, meta, config.metrics.qq_points, config.metrics.pdf_bins)
    logger.info("Run complete: %s (%d epochs)", run_dir, len(result.log))
    return result


def resume(run_dir: str | Path) -> tuple[Path, TrainResult]:
    """Continue the run stored in `run_dir` from its newest checkpoint."""
    config = load_config(Path(run_dir) / CONFIG_FILE)
    return run_training(config, resume=True)


@dataclass(frozen=True)
class GeneratedWindows:
    """Samples drawn from a checkpoint."""

    raw: NDArray[np.float64]
    returns: NDArray[np.float64]
    meta: dict[str, Any]


def generate_from_checkpoint(checkpoint_dir: str | Path, count: int, seed: int) -> GeneratedWindows:
    """Draw `count` windows from the generator stored in a checkpoint.

    Raw expectation values lie in [-1, 1]; `returns` are their post-processed
    log returns.

    Raises:
        MissingFile: If the checkpoint is incomplete.
        CheckpointMismatch: If the manifest lacks the run config or statistics.

    """
    path = Path(checkpoint_dir)
    if not (path / MANIFEST_FILE).exists():
        raise MissingFile(path / MANIFEST_FILE)
    if count < 0:
        msg = f"count must be >= 0, got {count}"
        raise ConfigError(msg)
    manifest = load_manifest(path)
    try:
        config = RunConfig.from_dict(manifest["config"])
        stats = NormStats(**manifest["norm_stats"])
    except (KeyError, TypeError) as exc:
        msg = f"manifest in {path} lacks config or normalization statistics"
        raise CheckpointMismatch(msg) from exc
    spec = config.circuit_spec()
    params = read_generator_csv(path / GENERATOR_FILE)
    if count == 0:
        raw = np.empty((0, spec.output_length))
    else:
        noise = sample_noise_batch(substream(seed, Stream.GENERATE, 0), spec, count)
        raw = make_backend(config.train_config()).expectations(spec, params, noise)
    meta = provenance(config.config_hash(), seed, checkpoint=file_digest(path / GENERATOR_FILE), epoch=manifest.get("epoch"))
    logger.info("Generated %d windows from %s", count, path)
    return GeneratedWindows(raw=raw, returns=postprocess(raw, stats, config.pipeline_config()), meta=meta)


def load_manifest(checkpoint_dir: Path) -> dict[str, Any]:
    """Read a checkpoint manifest without its provenance block."""
    return {k: v for k, v in read_json(checkpoint_dir / MANIFEST_FILE).items() if k != "provenance"}
