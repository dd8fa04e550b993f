"""Tests for the WGAN-GP training loop, checkpoints and resumption."""

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from qganfinance.backends import StatevectorBackend
from qganfinance.critic.network import CriticConfig, init_parameters, scores
from qganfinance.data.pipeline import preprocess
from qganfinance.errors import CheckpointMismatch, NonFiniteLoss, ShapeMismatch, WindowMismatch
from qganfinance.schemas.circuit import CircuitSpec
from qganfinance.schemas.series import PipelineConfig, PriceSeries, WindowBatch
from qganfinance.schemas.training import TRAIN_LOG_COLUMNS, BackendKind, TrainConfig
from qganfinance.training.adam import AdamState
from qganfinance.training.checkpoint import latest_checkpoint, load_checkpoint, read_generator_csv
from qganfinance.training.trainer import critic_step, generator_gradient, generator_step, initial_state, train


@pytest.fixture
def batch(prices: PriceSeries) -> WindowBatch:
    """Windows of length 6 to match a three-qubit generator."""
    return preprocess(prices, PipelineConfig(window=6, stride=3))


@pytest.fixture
def cfg() -> TrainConfig:
    """A few cheap epochs."""
    return TrainConfig(epochs=3, batch_size=8, critic_steps_per_gen_step=2, learning_rate=5e-3, metrics_samples=16, checkpoint_every=2, seed=11)


def test_two_epoch_smoke(batch: WindowBatch, small_spec: CircuitSpec, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """Training logs one finite row per epoch and moves both players."""
    start = initial_state(small_spec, tiny_critic, cfg)
    result = train(batch, small_spec, tiny_critic, replace(cfg, epochs=2))
    generator, critic, log = result.generator, result.critic, result.log

    assert [row.epoch for row in log.rows] == [1, 2]
    assert all(row.is_finite() for row in log.rows)
    assert list(log.to_frame().columns) == list(TRAIN_LOG_COLUMNS)
    assert not np.array_equal(generator.flat(), start.generator.flat())
    assert not np.array_equal(critic.flat(), start.critic.flat())


def test_training_is_deterministic(batch: WindowBatch, small_spec: CircuitSpec, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """Two runs with one seed give identical logs and parameters."""
    first = train(batch, small_spec, tiny_critic, cfg)
    second = train(batch, small_spec, tiny_critic, cfg)

    np.testing.assert_array_equal(first.generator.flat(), second.generator.flat())
    np.testing.assert_array_equal(first.log.to_frame().to_numpy(), second.log.to_frame().to_numpy())
    other = train(batch, small_spec, tiny_critic, replace(cfg, seed=12))
    assert not np.array_equal(first.generator.flat(), other.generator.flat())


def test_resume_matches_uninterrupted_run(
    tmp_path: Path,
    batch: WindowBatch,
    small_spec: CircuitSpec,
    tiny_critic: CriticConfig,
    cfg: TrainConfig,
) -> None:
    """Continuing from the epoch-2 checkpoint reproduces the full run bit for bit."""
    full = train(batch, small_spec, tiny_critic, cfg, run_dir=tmp_path / "full")
    assert [p.name for p in full.checkpoints] == ["epoch_000002", "epoch_000003"]

    start = load_checkpoint(full.checkpoints[0], tiny_critic)
    assert start.epoch == 2
    assert len(start.log) == 2
    resumed = train(batch, small_spec, tiny_critic, cfg, start=start)

    np.testing.assert_array_equal(resumed.generator.flat(), full.generator.flat())
    np.testing.assert_array_equal(resumed.critic.flat(), full.critic.flat())
    np.testing.assert_array_equal(resumed.log.to_frame().to_numpy(), full.log.to_frame().to_numpy())


def test_checkpoint_contents(tmp_path: Path, batch: WindowBatch, small_spec: CircuitSpec, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """The newest checkpoint holds the final parameters and optimizer steps."""
    result = train(batch, small_spec, tiny_critic, cfg, run_dir=tmp_path, manifest={"config_hash": "abc"})
    latest = latest_checkpoint(tmp_path)

    assert latest == result.checkpoints[-1]
    checkpoint = load_checkpoint(latest)
    np.testing.assert_array_equal(read_generator_csv(latest / "generator.csv").flat(), result.generator.flat())
    assert checkpoint.manifest == {"config_hash": "abc", "epoch": 3}
    assert checkpoint.generator_adam.step == 3
    assert checkpoint.critic_adam.step == 3 * cfg.critic_steps_per_gen_step
    with pytest.raises(CheckpointMismatch):
        load_checkpoint(latest, CriticConfig(input_length=6, conv_layers=()))


def test_window_mismatch(batch: WindowBatch, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """A generator whose 2n differs from the window length is rejected."""
    with pytest.raises(WindowMismatch):
        train(batch, CircuitSpec(4, 1), tiny_critic, cfg)


def test_critic_input_mismatch(batch: WindowBatch, small_spec: CircuitSpec, cfg: TrainConfig) -> None:
    """The critic must read windows of the batch length."""
    with pytest.raises(ShapeMismatch):
        train(batch, small_spec, CriticConfig(input_length=8, conv_layers=()), cfg)


def test_generator_step_against_zero_critic(small_spec: CircuitSpec, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """A constant critic gives no signal, so the generator does not move."""
    start = initial_state(small_spec, tiny_critic, cfg)
    critic = init_parameters(tiny_critic).zeros_like()
    noise = np.random.default_rng(0).uniform(0, 2 * np.pi, size=(4, 6))
    result = generator_step(small_spec, start.generator, start.generator_adam, tiny_critic, critic, noise, cfg, StatevectorBackend())

    assert result.loss == 0.0
    np.testing.assert_array_equal(result.params.flat(), start.generator.flat())
    assert result.adam.step == 1


def test_critic_step_ascends(batch: WindowBatch, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """Repeated critic steps on fixed batches raise the objective."""
    params = init_parameters(tiny_critic)
    adam = AdamState.zeros(params.size)
    real = batch.samples[:8]
    fake = np.zeros_like(real)
    eps = np.linspace(0.1, 0.9, 8)
    losses = []
    for _ in range(30):
        step = critic_step(tiny_critic, params, adam, fake, real, eps, replace(cfg, lambda_gp=0.0))
        params, adam = step.params, step.adam
        losses.append(step.loss)

    assert losses[-1] > losses[0]
    with pytest.raises(ShapeMismatch):
        critic_step(tiny_critic, params, adam, fake[:4], real, eps, cfg)


def test_non_finite_loss_reports_epoch(batch: WindowBatch, small_spec: CircuitSpec, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """A diverging critic aborts with the epoch attached."""
    start = initial_state(small_spec, tiny_critic, cfg)
    huge = start.critic.with_flat(np.full(start.critic.size, 1e200))
    with pytest.raises(NonFiniteLoss) as info:
        train(batch, small_spec, tiny_critic, cfg, start=replace(start, critic=huge))

    assert info.value.epoch == 1


def test_mps_training_runs(batch: WindowBatch, small_spec: CircuitSpec, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """The MPS backend trains through the same loop; in the exact regime it matches the statevector run."""
    dense = train(batch, small_spec, tiny_critic, replace(cfg, epochs=1))
    mps = train(batch, small_spec, tiny_critic, replace(cfg, epochs=1, backend=BackendKind.MPS, max_bond=2))

    np.testing.assert_allclose(mps.generator.flat(), dense.generator.flat(), atol=1e-6)


def test_generator_gradient_matches_finite_differences(small_spec: CircuitSpec, tiny_critic: CriticConfig, cfg: TrainConfig) -> None:
    """The chained critic and circuit gradient of mean D(G(z)) matches central differences."""
    start = initial_state(small_spec, tiny_critic, cfg)
    critic = init_parameters(tiny_critic)
    noise = np.random.default_rng(5).uniform(0, 2 * np.pi, size=(4, 6))
    backend = StatevectorBackend()
    loss, grad = generator_gradient(small_spec, start.generator, tiny_critic, critic, noise, backend)

    def objective(flat: np.ndarray) -> float:
        fake = backend.expectations(small_spec, start.generator.with_flat(flat), noise)
        return float(np.mean(scores(tiny_critic, critic, fake)))

    flat = start.generator.flat()
    h = 1e-6
    numeric = np.array([(objective(flat + h * e) - objective(flat - h * e)) / (2 * h) for e in np.eye(flat.size)])

    assert loss == pytest.approx(objective(flat), rel=1e-12)
    assert np.linalg.norm(grad - numeric) < 1e-4 * np.linalg.norm(numeric)

    result = generator_step(small_spec, start.generator, AdamState.zeros(flat.size), tiny_critic, critic, noise, cfg, backend)
    moved = result.params.flat() - flat
    clear = np.abs(grad) > 1e-3
    np.testing.assert_allclose(moved[clear], cfg.learning_rate * np.sign(grad[clear]), rtol=1e-4)
