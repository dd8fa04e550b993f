"""Alternating WGAN-GP optimization of the quantum generator against the critic.

Each epoch runs n_critic critic steps followed by one generator step, then
scores post-processed samples against the reference windows. All draws come
from counter-keyed sub-streams of the run seed:
  minibatch (epoch, step)   real rows, uniform with replacement
  noise     (epoch, step)   generator noise; step n_critic is the generator step
  epsilons  (epoch, step)   gradient-penalty interpolation weights
  metrics   (epoch,)        noise for the metric samples
"""

from __future__ import annotations

import time
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from qganfinance.backends import GeneratorBackend, create_backend
from qganfinance.circuit.ansatz import check_lengths, init_parameters, sample_noise_batch
from qganfinance.critic import network
from qganfinance.critic.network import CriticConfig, CriticParameters
from qganfinance.data.pipeline import postprocess
from qganfinance.errors import NonFiniteLoss, ShapeMismatch, WindowMismatch
from qganfinance.logging_utils import get_logger
from qganfinance.metrics.stylized_facts import stylized_fact_errors
from qganfinance.schemas.circuit import CircuitSpec, ParameterSet
from qganfinance.schemas.metrics import MetricsReport
from qganfinance.schemas.series import WindowBatch
from qganfinance.schemas.training import TrainConfig, TrainLog, TrainLogRow
from qganfinance.training.adam import AdamState, adam_step
from qganfinance.training.checkpoint import Checkpoint, save_checkpoint
from qganfinance.training.seeding import Stream, substream

logger = get_logger("training.trainer")

GENERATOR_INIT = 0
CRITIC_INIT = 1


@dataclass(frozen=True)
class StepResult:
    """Outcome of one critic or generator step."""

    params: Any
    adam: AdamState
    loss: float
    wasserstein: float = 0.0


@dataclass
class TrainResult:
    """Final parameters, the log, and per-epoch wall times (kept out of the log)."""

    generator: ParameterSet
    critic: CriticParameters
    log: TrainLog
    timings: list[tuple[int, float]] = field(default_factory=list)
    final_report: MetricsReport | None = None
    checkpoints: list[Path] = field(default_factory=list)

    def __iter__(self) -> Iterator[Any]:
        """Unpack as (generator, critic, log)."""
        return iter((self.generator, self.critic, self.log))


def make_backend(cfg: TrainConfig) -> GeneratorBackend:
    """Create the configured generator backend."""
    return create_backend(cfg.backend, cfg.max_bond)


def critic_step(
    critic_cfg: CriticConfig,
    critic_params: CriticParameters,
    adam: AdamState,
    gen_samples: NDArray[np.float64],
    real_samples: NDArray[np.float64],
    epsilons: NDArray[np.float64],
    cfg: TrainConfig,
) -> StepResult:
    """One Adam ascent step on L = mean D(real) - mean D(fake) - penalty.

    Raises:
        ShapeMismatch: If the two batches differ in shape.
        NonFiniteLoss: If L is not finite.

    """
    if np.shape(gen_samples) != np.shape(real_samples):
        msg = f"real {np.shape(real_samples)} and fake {np.shape(gen_samples)} batches differ"
        raise ShapeMismatch(msg)
    objective = network.critic_objective(critic_cfg, critic_params, real_samples, gen_samples, epsilons, cfg.lambda_gp)
    if not np.isfinite(objective.value):
        msg = "critic"
        raise NonFiniteLoss(msg)
    new_adam, flat = adam_step(adam, critic_params.flat(), -objective.grads.flat(), cfg.learning_rate, cfg.adam)
    return StepResult(
        params=critic_params.with_flat(flat),
        adam=new_adam,
        loss=objective.value,
        wasserstein=objective.real_mean - objective.fake_mean,
    )


def generator_gradient(
    spec: CircuitSpec,
    gen_params: ParameterSet,
    critic_cfg: CriticConfig,
    critic_params: CriticParameters,
    noise_batch: NDArray[np.float64],
    backend: GeneratorBackend,
) -> tuple[float, NDArray[np.float64]]:
    """Return L_G = mean D(G(z)) and its gradient, thetas then lambdas.

    The critic's input gradient of L_G is pulled back through the circuit by
    the backend's parameter-shift gradient.

    Raises:
        NonFiniteLoss: If L_G is not finite.

    """
    fake = backend.expectations(spec, gen_params, noise_batch)
    scores, tape = network.forward(critic_cfg, critic_params, fake)
    loss = float(np.mean(scores))
    if not np.isfinite(loss):
        msg = "generator"
        raise NonFiniteLoss(msg)
    _, upstream = network.backward(tape, np.full(len(scores), 1.0 / len(scores)))
    dtheta, dlambda = backend.gradient(spec, gen_params, noise_batch, upstream)
    return loss, np.concatenate([dtheta, dlambda])


def generator_step(
    spec: CircuitSpec,
    gen_params: ParameterSet,
    adam: AdamState,
    critic_cfg: CriticConfig,
    critic_params: CriticParameters,
    noise_batch: NDArray[np.float64],
    cfg: TrainConfig,
    backend: GeneratorBackend,
) -> StepResult:
    """One Adam ascent step on L_G = mean D(G(z))."""
    loss, grad = generator_gradient(spec, gen_params, critic_cfg, critic_params, noise_batch, backend)
    new_adam, flat = adam_step(adam, gen_params.flat(), -grad, cfg.learning_rate, cfg.adam)
    return StepResult(params=gen_params.with_flat(flat), adam=new_adam, loss=loss)


def default_tau_max(window: int, cfg: TrainConfig) -> int:
    """tau_max from the config, else window // 2."""
    return cfg.tau_max if cfg.tau_max is not None else max(1, window // 2)


def evaluate_generator(
    spec: CircuitSpec,
    params: ParameterSet,
    backend: GeneratorBackend,
    batch: WindowBatch,
    reference: NDArray[np.float64],
    cfg: TrainConfig,
    epoch: int,
) -> tuple[MetricsReport, NDArray[np.float64]]:
    """Score post-processed generator samples against the reference windows."""
    noise = sample_noise_batch(substream(cfg.seed, Stream.METRICS, epoch), spec, cfg.metrics_samples)
    generated = postprocess(backend.expectations(spec, params, noise), batch.norm_stats, batch.config)
    return stylized_fact_errors(reference, generated, default_tau_max(batch.config.window, cfg)), generated


def initial_state(spec: CircuitSpec, critic_cfg: CriticConfig, cfg: TrainConfig) -> Checkpoint:
    """Fresh parameters and optimizer states at epoch 0."""
    generator = init_parameters(spec, substream(cfg.seed, Stream.INIT, GENERATOR_INIT))
    critic = network.init_parameters(critic_cfg, int(substream(cfg.seed, Stream.INIT, CRITIC_INIT).integers(2**31)))
    return Checkpoint(
        epoch=0,
        generator=generator,
        critic=critic,
        generator_adam=AdamState.zeros(generator.size),
        critic_adam=AdamState.zeros(critic.size),
        log=TrainLog(),
        manifest={},
    )


def _validate(batch: WindowBatch, spec: CircuitSpec, critic_cfg: CriticConfig, start: Checkpoint) -> None:
    if spec.output_length != batch.config.window:
        msg = f"generator emits 2n = {spec.output_length} values but windows have length {batch.config.window}"
        raise WindowMismatch(msg)
    if critic_cfg.input_length != batch.config.window:
        msg = f"critic input_length {critic_cfg.input_length} differs from window {batch.config.window}"
        raise ShapeMismatch(msg)
    check_lengths(spec, start.generator)
    if not start.critic.matches(critic_cfg):
        msg = "critic parameters do not match the configured architecture"
        raise ShapeMismatch(msg)


def train(
    batch: WindowBatch,
    circuit: CircuitSpec,
    critic_cfg: CriticConfig,
    cfg: TrainConfig,
    *,
    reference: NDArray[np.float64] | None = None,
    run_dir: Path | None = None,
    start: Checkpoint | None = None,
    manifest: dict[str, Any] | None = None,
    meta: dict[str, Any] | None = None,
    on_epoch: Callable[[TrainLogRow], None] | None = None,
) -> TrainResult:
    """Run WGAN-GP training from `start` (default: fresh initialization) to `cfg.epochs`.

    Args:
        batch: Preprocessed training windows
        circuit: Generator geometry, 2n must equal the window length
        critic_cfg: Critic architecture
        cfg: Training hyper-parameters
        reference: Log-return windows for metrics; defaults to post-processed training windows
        run_dir: Where checkpoints go; no checkpoints when None
        start: Checkpoint to continue from
        manifest: Extra manifest fields stored with each checkpoint
        meta: Provenance for checkpoint artifacts
        on_epoch: Callback invoked with every new log row

    Returns:
        TrainResult, unpackable as (generator, critic, log)

    Raises:
        WindowMismatch: If 2 * n_qubits differs from the window length.
        NonFiniteLoss: If a loss diverges; checkpoints written so far are kept.

    """
    state = start if start is not None else initial_state(circuit, critic_cfg, cfg)
    _validate(batch, circuit, critic_cfg, state)
    backend = make_backend(cfg)
    ref = reference if reference is not None else postprocess(batch.samples, batch.norm_stats, batch.config)

    gen_params, critic_params = state.generator, state.critic
    gen_adam, critic_adam = state.generator_adam, state.critic_adam
    log = TrainLog(rows=list(state.log.rows))
    result = TrainResult(generator=gen_params, critic=critic_params, log=log)
    n_rows = batch.num_windows
    report: MetricsReport | None = None

    logger.info(
        "Training %s: n=%d L=%d epochs %d..%d B=%d n_critic=%d",
        backend.describe(),
        circuit.n_qubits,
        circuit.n_layers,
        state.epoch + 1,
        cfg.epochs,
        cfg.batch_size,
        cfg.critic_steps_per_gen_step,
    )
    for epoch in range(state.epoch + 1, cfg.epochs + 1):
        started = time.perf_counter()
        critic_result = StepResult(params=critic_params, adam=critic_adam, loss=0.0)
        for step in range(cfg.critic_steps_per_gen_step):
            rows = substream(cfg.seed, Stream.MINIBATCH, epoch, step).integers(0, n_rows, size=cfg.batch_size)
            noise = sample_noise_batch(substream(cfg.seed, Stream.NOISE, epoch, step), circuit, cfg.batch_size)
            epsilons = substream(cfg.seed, Stream.EPSILONS, epoch, step).uniform(0.0, 1.0, size=cfg.batch_size)
            fake = backend.expectations(circuit, gen_params, noise)
            try:
                critic_result = critic_step(critic_cfg, critic_params, critic_adam, fake, batch.samples[rows], epsilons, cfg)
            except NonFiniteLoss as exc:
                raise NonFiniteLoss(exc.which, epoch) from exc
            critic_params, critic_adam = critic_result.params, critic_result.adam
            logger.debug("epoch %d critic step %d: L=%.6g", epoch, step, critic_result.loss)

        noise = sample_noise_batch(substream(cfg.seed, Stream.NOISE, epoch, cfg.critic_steps_per_gen_step), circuit, cfg.batch_size)
        try:
            gen_result = generator_step(circuit, gen_params, gen_adam, critic_cfg, critic_params, noise, cfg, backend)
        except NonFiniteLoss as exc:
            raise NonFiniteLoss(exc.which, epoch) from exc
        gen_params, gen_adam = gen_result.params, gen_result.adam

        report, _ = evaluate_generator(circuit, gen_params, backend, batch, ref, cfg, epoch)
        row = TrainLogRow(
            epoch=epoch,
            critic_loss=critic_result.loss,
            generator_loss=gen_result.loss,
            wasserstein_estimate=critic_result.wasserstein,
            E_ACF_id=report.e_acf_id,
            E_ACF_abs=report.e_acf_abs,
            E_Lev=report.e_lev,
            EMD=report.emd,
            wall_time=0.0,
        )
        if not row.is_finite():
            msg = "metrics"
            raise NonFiniteLoss(msg, epoch)
        log.append(row)
        result.timings.append((epoch, time.perf_counter() - started))
        logger.info(
            "epoch %d: critic_loss=%.6g generator_loss=%.6g W=%.6g EMD=%.3e",
            epoch,
            row.critic_loss,
            row.generator_loss,
            row.wasserstein_estimate,
            row.EMD,
        )
        if on_epoch is not None:
            on_epoch(row)

        if run_dir is not None and (epoch % cfg.checkpoint_every == 0 or epoch == cfg.epochs):
            checkpoint = Checkpoint(
                epoch=epoch,
                generator=gen_params,
                critic=critic_params,
                generator_adam=gen_adam,
                critic_adam=critic_adam,
                log=TrainLog(rows=list(log.rows)),
                manifest=manifest or {},
            )
            result.checkpoints.append(save_checkpoint(run_dir, checkpoint, meta or {}))

    result.generator, result.critic = gen_params, critic_params
    result.final_report = report
    return result
