"""Convolutional Wasserstein critic on top of the tape engine.

Input windows (B, m) are treated as one channel. Each conv layer is
unfold -> contraction with a (filters, channels, kernel) weight -> bias -> ReLU;
the flattened features then go through dense layers with ReLU, except the last
single neuron which is linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from qganfinance.critic import tape as ad
from qganfinance.errors import ArtifactIOError, ConfigError, MissingFile, ShapeMismatch
from qganfinance.logging_utils import get_logger

if TYPE_CHECKING:
    from collections.abc import Iterator

    from numpy.typing import NDArray

logger = get_logger("critic.network")

INPUT_LEAF = "input"


class Padding(str, Enum):
    """Convolution boundary handling."""

    VALID = "valid"
    SAME = "same"


@dataclass(frozen=True)
class ConvLayer:
    """One 1-D convolution."""

    filters: int
    kernel: int
    stride: int = 1


DEFAULT_CONV_LAYERS = (ConvLayer(32, 5, 1), ConvLayer(64, 5, 2))
DEFAULT_DENSE_LAYERS = (64, 1)


@dataclass(frozen=True)
class CriticConfig:
    """Critic architecture.

    `dense_layers` lists every dense width including the final 1.
    """

    input_length: int
    conv_layers: tuple[ConvLayer, ...] = DEFAULT_CONV_LAYERS
    dense_layers: tuple[int, ...] = DEFAULT_DENSE_LAYERS
    seed: int = 0
    padding: Padding = Padding.VALID

    def __post_init__(self) -> None:
        """Validate the layer stack against the input length."""
        object.__setattr__(self, "padding", Padding(self.padding))
        object.__setattr__(self, "conv_layers", tuple(c if isinstance(c, ConvLayer) else ConvLayer(*c) for c in self.conv_layers))
        object.__setattr__(self, "dense_layers", tuple(int(d) for d in self.dense_layers))
        if self.input_length < 1:
            msg = f"critic input_length must be >= 1, got {self.input_length}"
            raise ConfigError(msg)
        if not self.dense_layers or self.dense_layers[-1] != 1:
            msg = "the last dense layer of the critic must have width 1"
            raise ConfigError(msg)
        if any(d < 1 for d in self.dense_layers):
            msg = "dense widths must be positive"
            raise ConfigError(msg)
        self.feature_shapes()

    def feature_shapes(self) -> list[tuple[int, int]]:
        """Return (channels, length) after the input and after every conv layer."""
        shapes = [(1, self.input_length)]
        for i, conv in enumerate(self.conv_layers):
            _, length = shapes[-1]
            if conv.filters < 1 or conv.stride < 1 or conv.kernel < 1:
                msg = f"conv layer {i}: filters, kernel and stride must be >= 1"
                raise ConfigError(msg)
            if self.padding is Padding.SAME:
                out = -(-length // conv.stride)
            else:
                if conv.kernel > length:
                    msg = f"conv layer {i}: kernel {conv.kernel} exceeds input length {length}"
                    raise ConfigError(msg)
                out = (length - conv.kernel) // conv.stride + 1
            shapes.append((conv.filters, out))
        return shapes

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        """Return the ordered name -> shape map of all weights and biases."""
        shapes: dict[str, tuple[int, ...]] = {}
        features = self.feature_shapes()
        for i, conv in enumerate(self.conv_layers):
            shapes[f"conv{i}.weight"] = (conv.filters, features[i][0], conv.kernel)
            shapes[f"conv{i}.bias"] = (conv.filters,)
        width = features[-1][0] * features[-1][1]
        for i, out in enumerate(self.dense_layers):
            shapes[f"dense{i}.weight"] = (out, width)
            shapes[f"dense{i}.bias"] = (out,)
            width = out
        return shapes


@dataclass(frozen=True)
class CriticParameters:
    """Named weight and bias arrays in layer order."""

    arrays: dict[str, NDArray[np.float64]] = field(default_factory=dict)

    def __iter__(self) -> Iterator[str]:
        """Iterate over parameter names in layer order."""
        return iter(self.arrays)

    def __getitem__(self, name: str) -> NDArray[np.float64]:
        """Return one array."""
        return self.arrays[name]

    @property
    def size(self) -> int:
        """Total number of scalars."""
        return sum(a.size for a in self.arrays.values())

    def flat(self) -> NDArray[np.float64]:
        """Concatenate all arrays in layer order."""
        return np.concatenate([a.ravel() for a in self.arrays.values()])

    def with_flat(self, values: NDArray[np.float64]) -> CriticParameters:
        """Return parameters of the same shapes filled from a flat vector."""
        out: dict[str, NDArray[np.float64]] = {}
        offset = 0
        for name, array in self.arrays.items():
            out[name] = np.array(values[offset : offset + array.size], dtype=np.float64).reshape(array.shape)
            offset += array.size
        return CriticParameters(out)

    def zeros_like(self) -> CriticParameters:
        """Same shapes, all zeros."""
        return CriticParameters({name: np.zeros_like(a) for name, a in self.arrays.items()})

    def is_finite(self) -> bool:
        """Return True if every entry is finite."""
        return all(np.all(np.isfinite(a)) for a in self.arrays.values())

    def matches(self, config: CriticConfig) -> bool:
        """Return True if names and shapes agree with `config`."""
        expected = config.parameter_shapes()
        return list(expected) == list(self.arrays) and all(self.arrays[n].shape == s for n, s in expected.items())


def init_parameters(config: CriticConfig, seed: int | None = None) -> CriticParameters:
    """Draw every weight and bias from U[-k, k] with k = fan_in ** -0.5."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    arrays: dict[str, NDArray[np.float64]] = {}
    shapes = config.parameter_shapes()
    for name, shape in shapes.items():
        weight_shape = shapes[name.replace(".bias", ".weight")]
        fan_in = int(np.prod(weight_shape[1:]))
        bound = fan_in**-0.5
        arrays[name] = rng.uniform(-bound, bound, size=shape)
    return CriticParameters(arrays)


def _same_padding(length: int, kernel: int, stride: int) -> tuple[int, int]:
    out = -(-length // stride)
    total = max((out - 1) * stride + kernel - length, 0)
    return total // 2, total - total // 2


def apply_network(config: CriticConfig, leaves: dict[str, ad.Var], x: ad.Var) -> ad.Var:
    """Build the forward graph for a (B, m) input; returns (B,) scores."""
    batch = x.shape[0]
    h = ad.reshape(x, (batch, 1, config.input_length))
    for i, conv in enumerate(config.conv_layers):
        length = h.shape[-1]
        if config.padding is Padding.SAME:
            left, right = _same_padding(length, conv.kernel, conv.stride)
            h = ad.pad_last(h, left, right)
            length += left + right
        out = (length - conv.kernel) // conv.stride + 1
        index = conv.stride * np.arange(out)[:, None] + np.arange(conv.kernel)[None, :]
        patches = ad.gather(h, index)
        h = ad.einsum("bclk,fck->bfl", patches, leaves[f"conv{i}.weight"])
        h = ad.relu(ad.add(h, ad.reshape(leaves[f"conv{i}.bias"], (1, conv.filters, 1))))
    h = ad.reshape(h, (batch, int(np.prod(h.shape[1:]))))
    last = len(config.dense_layers) - 1
    for i in range(len(config.dense_layers)):
        h = ad.add(ad.einsum("bi,oi->bo", h, leaves[f"dense{i}.weight"]), leaves[f"dense{i}.bias"])
        if i < last:
            h = ad.relu(h)
    return ad.reshape(h, (batch,))


def _check_batch(config: CriticConfig, batch: NDArray[np.float64]) -> NDArray[np.float64]:
    values = np.asarray(batch, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != config.input_length:  # noqa: PLR2004
        msg = f"critic expects a (B, {config.input_length}) batch, got {values.shape}"
        raise ShapeMismatch(msg)
    if not np.all(np.isfinite(values)):
        msg = "critic input contains non-finite values"
        raise ShapeMismatch(msg)
    return values


def _check_params(config: CriticConfig, params: CriticParameters) -> None:
    if not params.matches(config):
        msg = "critic parameters do not match the configured architecture"
        raise ShapeMismatch(msg)


def forward(config: CriticConfig, params: CriticParameters, batch: NDArray[np.float64]) -> tuple[NDArray[np.float64], ad.Tape]:
    """Score a batch and keep the tape for `backward`.

    Raises:
        ShapeMismatch: If the batch width or parameter shapes disagree with the config.

    """
    values = _check_batch(config, batch)
    _check_params(config, params)
    with ad.Tape() as tape:
        leaves = {name: tape.leaf(params[name], name) for name in params}
        x = tape.leaf(values, INPUT_LEAF)
        tape.output = apply_network(config, leaves, x)
    return tape.output.value.copy(), tape


def backward(tape: ad.Tape, upstream: NDArray[np.float64]) -> tuple[CriticParameters, NDArray[np.float64]]:
    """Return gradients of upstream . scores w.r.t. parameters and inputs.

    Raises:
        StaleTape: If a recorded parameter or input changed after `forward`.
        ShapeMismatch: If `upstream` does not have one entry per score.

    """
    if tape.output is None:
        msg = "tape has no recorded output"
        raise ShapeMismatch(msg)
    up = np.asarray(upstream, dtype=np.float64)
    if up.shape != tape.output.shape:
        msg = f"upstream shape {up.shape} does not match scores {tape.output.shape}"
        raise ShapeMismatch(msg)
    names = [name for name in tape.leaves if name != INPUT_LEAF]
    wrt = [tape.leaves[name] for name in names] + [tape.leaves[INPUT_LEAF]]
    grads = ad.grad(tape.output, wrt, up)
    param_grads = CriticParameters({name: g.value for name, g in zip(names, grads[:-1], strict=True)})
    return param_grads, grads[-1].value


def scores(config: CriticConfig, params: CriticParameters, batch: NDArray[np.float64]) -> NDArray[np.float64]:
    """Score a batch without keeping a tape."""
    values = _check_batch(config, batch)
    with ad.no_recording():
        leaves = {name: ad.Var(params[name]) for name in params}
        return apply_network(config, leaves, ad.Var(values)).value


def interpolate(real: NDArray[np.float64], fake: NDArray[np.float64], epsilons: NDArray[np.float64]) -> NDArray[np.float64]:
    """Return eps_b * real_b + (1 - eps_b) * fake_b row by row."""
    if real.shape != fake.shape or np.shape(epsilons) != (real.shape[0],):
        msg = f"real {real.shape}, fake {fake.shape} and epsilons {np.shape(epsilons)} do not line up"
        raise ShapeMismatch(msg)
    eps = np.asarray(epsilons, dtype=np.float64)[:, None]
    return eps * real + (1.0 - eps) * fake


def _penalty_graph(config: CriticConfig, leaves: dict[str, ad.Var], x_hat: ad.Var, lambda_gp: float) -> ad.Var:
    hat_scores = apply_network(config, leaves, x_hat)
    (input_grad,) = ad.grad(ad.sum_axis(hat_scores), [x_hat], create_graph=True)
    gap = ad.add(ad.l2_norm(input_grad, axis=1), ad.Var(-1.0))
    return ad.scale(ad.mean(ad.mul(gap, gap)), lambda_gp)


def gradient_penalty(
    config: CriticConfig,
    params: CriticParameters,
    real_batch: NDArray[np.float64],
    fake_batch: NDArray[np.float64],
    epsilons: NDArray[np.float64],
    lambda_gp: float,
) -> tuple[float, CriticParameters]:
    """Return lambda_gp * mean_b (||grad_x D(x_hat_b)|| - 1)^2 and its parameter gradient.

    The input gradient is taken with a recorded reverse pass, and the penalty
    is then differentiated through that pass.
    """
    real = _check_batch(config, real_batch)
    fake = _check_batch(config, fake_batch)
    x_hat_values = interpolate(real, fake, epsilons)
    _check_params(config, params)
    with ad.Tape() as tape:
        leaves = {name: tape.leaf(params[name], name) for name in params}
        x_hat = tape.leaf(x_hat_values, INPUT_LEAF)
        penalty = _penalty_graph(config, leaves, x_hat, lambda_gp)
        tape.output = penalty
    names = list(leaves)
    grads = ad.grad(penalty, [leaves[n] for n in names])
    return float(penalty.value), CriticParameters({n: g.value for n, g in zip(names, grads, strict=True)})


@dataclass(frozen=True)
class CriticObjective:
    """Value and parts of the maximized critic objective L."""

    value: float
    real_mean: float
    fake_mean: float
    penalty: float
    grads: CriticParameters


def critic_objective(
    config: CriticConfig,
    params: CriticParameters,
    real_batch: NDArray[np.float64],
    fake_batch: NDArray[np.float64],
    epsilons: NDArray[np.float64],
    lambda_gp: float,
) -> CriticObjective:
    """Return L = mean D(real) - mean D(fake) - penalty and dL/dparams from one tape."""
    real = _check_batch(config, real_batch)
    fake = _check_batch(config, fake_batch)
    x_hat_values = interpolate(real, fake, epsilons)
    _check_params(config, params)
    with ad.Tape() as tape:
        leaves = {name: tape.leaf(params[name], name) for name in params}
        real_mean = ad.mean(apply_network(config, leaves, ad.Var(real)))
        fake_mean = ad.mean(apply_network(config, leaves, ad.Var(fake)))
        if lambda_gp > 0:
            penalty = _penalty_graph(config, leaves, tape.leaf(x_hat_values, INPUT_LEAF), lambda_gp)
        else:
            penalty = ad.Var(0.0)
        objective = ad.add(ad.add(real_mean, ad.neg(fake_mean)), ad.neg(penalty))
        tape.output = objective
    names = list(leaves)
    grads = ad.grad(objective, [leaves[n] for n in names])
    return CriticObjective(
        value=float(objective.value),
        real_mean=float(real_mean.value),
        fake_mean=float(fake_mean.value),
        penalty=float(penalty.value),
        grads=CriticParameters({n: g.value for n, g in zip(names, grads, strict=True)}),
    )


def save_parameters(params: CriticParameters, path: str | Path) -> Path:
    """Write parameters to `.npz`; names and shapes travel with the arrays."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    try:
        with target.open("wb") as f:
            np.savez(f, __order__=np.array(list(params.arrays)), **params.arrays)
    except OSError as exc:
        msg = f"Could not write {target}: {exc}"
        raise ArtifactIOError(msg) from exc
    logger.debug("Saved %d critic parameters to %s", params.size, target)
    return target


def load_parameters(path: str | Path, config: CriticConfig | None = None) -> CriticParameters:
    """Read parameters written by `save_parameters`.

    Raises:
        MissingFile: If the file does not exist.
        ShapeMismatch: If `config` is given and shapes disagree.

    """
    source = Path(path)
    if not source.exists():
        raise MissingFile(source)
    try:
        with np.load(source, allow_pickle=False) as data:
            order = [str(name) for name in data["__order__"]]
            params = CriticParameters({name: np.array(data[name], dtype=np.float64) for name in order})
    except (OSError, KeyError, ValueError) as exc:
        msg = f"Could not read critic checkpoint {source}: {exc}"
        raise ArtifactIOError(msg) from exc
    if config is not None:
        _check_params(config, params)
    return params
