"""Per-run JSON configuration.

A run config is one JSON document with fixed sections. Loading is strict:
unknown keys fail with their dotted path, values are coerced to the field
type, and cross-field rules are checked before any computation starts.
"""

from __future__ import annotations

import hashlib
import json
import types
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Union, get_args, get_origin, get_type_hints

from qganfinance.artifacts import read_json, write_json
from qganfinance.critic.network import ConvLayer, CriticConfig, Padding
from qganfinance.errors import ConfigError, InvalidBond, ValidationError, WindowMismatch
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.circuit import CircuitSpec, Topology
from qganfinance.schemas.series import PipelineConfig
from qganfinance.schemas.training import AdamConfig, BackendKind, TrainConfig
from qganfinance.settings import settings

logger = get_logger("config")

PROVENANCE_KEY = "provenance"
CONFIG_FILE = "config.json"


@dataclass(frozen=True)
class PipelineSection:
    """Pre-processing parameters."""

    delta: float = 0.5
    clip_bound: float = 4.0
    window: int = 20
    stride: int = 5


@dataclass(frozen=True)
class CircuitSection:
    """Generator geometry."""

    n_qubits: int = 10
    n_layers: int = 4
    topology: str = Topology.CHAIN.value


@dataclass(frozen=True)
class CriticSection:
    """Critic architecture; conv layers are (filters, kernel, stride) triples."""

    conv_layers: tuple[tuple[int, ...], ...] = ((32, 5, 1), (64, 5, 2))
    dense_layers: tuple[int, ...] = (64, 1)
    padding: str = Padding.VALID.value


@dataclass(frozen=True)
class TrainSection:
    """Optimization hyper-parameters."""

    epochs: int = 100
    batch_size: int = 64
    critic_steps_per_gen_step: int = 5
    lambda_gp: float = 10.0
    learning_rate: float = 1e-3
    backend: str = BackendKind.STATEVECTOR.value
    max_bond: int | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    checkpoint_every: int = 100
    metrics_samples: int = 256


@dataclass(frozen=True)
class MetricsSection:
    """Evaluation settings; tau_max defaults to window // 2."""

    tau_max: int | None = None
    qq_points: int = 99
    pdf_bins: int = 50


@dataclass(frozen=True)
class PathsSection:
    """Input and output locations, relative to the config file."""

    prices: str = "prices.csv"
    batch: str = "batch.csv"
    runs_dir: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one experiment."""

    pipeline: PipelineSection = field(default_factory=PipelineSection)
    circuit: CircuitSection = field(default_factory=CircuitSection)
    critic: CriticSection = field(default_factory=CriticSection)
    train: TrainSection = field(default_factory=TrainSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    paths: PathsSection = field(default_factory=PathsSection)
    seed: int = 0
    base_dir: Path = field(default=Path(), compare=False)

    # --- construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Path | None = None) -> RunConfig:
        """Build a config from a parsed JSON document.

        Raises:
            ConfigError: On unknown keys, wrong types, or invalid values.

        """
        payload = {k: v for k, v in data.items() if k != PROVENANCE_KEY}
        config = _build(cls, payload, "", skip={"base_dir"})
        config = replace(config, base_dir=base_dir if base_dir is not None else Path())
        config.check()
        return config

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON document (without base_dir)."""
        payload = asdict(self)
        payload.pop("base_dir")
        return json.loads(json.dumps(payload))

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        epochs: int | None = None,
        backend: str | None = None,
        bond: int | None = None,
    ) -> RunConfig:
        """Apply command-line overrides and re-validate."""
        train = self.train
        if epochs is not None:
            train = replace(train, epochs=epochs)
        if backend is not None:
            train = replace(train, backend=backend)
        if bond is not None:
            train = replace(train, max_bond=bond)
        updated = replace(self, train=train, seed=self.seed if seed is None else seed)
        updated.check()
        return updated

    # --- validation -------------------------------------------------------

    def check(self, *, for_training: bool = False) -> None:
        """Validate every section and the cross-field rules.

        With `for_training` a generator/window length mismatch is an error;
        otherwise it only warns.

        Raises:
            ConfigError: If a section or rule is violated.
            InvalidBond: If an MPS bond dimension is below 1.
            WindowMismatch: If `for_training` and 2 * n_qubits != window.

        """
        if self.seed < 0:
            msg = "seed must be >= 0"
            raise ConfigError(msg)
        if self.train.max_bond is not None and self.train.max_bond < 1:
            msg = f"train.max_bond must be >= 1, got {self.train.max_bond}"
            raise InvalidBond(msg)
        try:
            pipeline = self.pipeline_config()
            circuit = self.circuit_spec()
            self.critic_config()
            self.train_config()
        except ConfigError:
            raise
        except (ValidationError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        tau_max = self.tau_max()
        if not 1 <= tau_max < pipeline.window:
            msg = f"metrics.tau_max must lie in [1, window); got {tau_max} with window {pipeline.window}"
            raise ConfigError(msg)
        if self.metrics.qq_points < 2 or self.metrics.pdf_bins < 2:  # noqa: PLR2004
            msg = "metrics.qq_points and metrics.pdf_bins must be >= 2"
            raise ConfigError(msg)
        if circuit.output_length != pipeline.window:
            msg = f"2 * circuit.n_qubits = {circuit.output_length} differs from pipeline.window = {pipeline.window}"
            if for_training:
                raise WindowMismatch(msg)
            logger.warning("%s; training with this config will fail", msg)

    # --- typed views ------------------------------------------------------

    def pipeline_config(self) -> PipelineConfig:
        """Return the pipeline configuration."""
        return PipelineConfig(**asdict(self.pipeline))

    def circuit_spec(self) -> CircuitSpec:
        """Return the generator geometry."""
        return CircuitSpec(self.circuit.n_qubits, self.circuit.n_layers, Topology(self.circuit.topology))

    def critic_config(self) -> CriticConfig:
        """Return the critic architecture; its input length is the window."""
        return CriticConfig(
            input_length=self.pipeline.window,
            conv_layers=tuple(ConvLayer(*layer) for layer in self.critic.conv_layers),
            dense_layers=self.critic.dense_layers,
            seed=self.seed,
            padding=Padding(self.critic.padding),
        )

    def tau_max(self) -> int:
        """Return the configured or default maximum lag."""
        return self.metrics.tau_max if self.metrics.tau_max is not None else max(1, self.pipeline.window // 2)

    def train_config(self) -> TrainConfig:
        """Return the training hyper-parameters."""
        section = self.train
        return TrainConfig(
            epochs=section.epochs,
            batch_size=section.batch_size,
            critic_steps_per_gen_step=section.critic_steps_per_gen_step,
            lambda_gp=section.lambda_gp,
            learning_rate=section.learning_rate,
            backend=BackendKind(section.backend),
            max_bond=section.max_bond,
            seed=self.seed,
            adam=AdamConfig(beta1=section.beta1, beta2=section.beta2, eps_hat=section.eps_hat),
            checkpoint_every=section.checkpoint_every,
            metrics_samples=section.metrics_samples,
            tau_max=self.tau_max(),
        )

    # --- paths and identity -----------------------------------------------

    def resolve(self, value: str) -> Path:
        """Resolve a configured path against the config file directory."""
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path

    @property
    def prices_path(self) -> Path:
        """Return the input price CSV."""
        return self.resolve(self.paths.prices)

    @property
    def batch_path(self) -> Path:
        """Return the preprocessed window batch CSV."""
        return self.resolve(self.paths.batch)

    @property
    def runs_root(self) -> Path:
        """Return the directory that holds run directories."""
        return self.resolve(self.paths.runs_dir) if self.paths.runs_dir is not None else settings.runs_dir

    def config_hash(self) -> str:
        """First 12 hex chars of SHA-256 over the canonical JSON.

        The seed, the epoch count and the paths are left out: the seed is part
        of the run directory name, and extending a run to more epochs continues
        in the same directory.
        """
        payload = self.to_dict()
        payload.pop("seed")
        payload.pop("paths")
        payload["train"].pop("epochs")
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def run_name(self) -> str:
        """Return `<hash>-s<seed>`."""
        return f"{self.config_hash()}-s{self.seed}"

    def run_dir(self) -> Path:
        """Return this run's directory."""
        return self.runs_root / self.run_name()

    def absolute(self) -> RunConfig:
        """Return a copy whose paths no longer depend on base_dir."""
        paths = PathsSection(
            prices=str(self.prices_path.resolve()),
            batch=str(self.batch_path.resolve()),
            runs_dir=str(self.runs_root.resolve()),
        )
        return replace(self, paths=paths, base_dir=Path())


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a run config file.

    Raises:
        MissingFile: If the file does not exist.
        ConfigError: If the document is not a JSON object or fails validation.

    """
    source = Path(path)
    document = read_json(source)
    if not isinstance(document, dict):
        msg = f"{source} must hold a JSON object"
        raise ConfigError(msg)
    return RunConfig.from_dict(document, base_dir=source.parent)


def save_config(config: RunConfig, path: Path, meta: dict[str, Any] | None = None) -> Path:
    """Write a config document, optionally with a provenance block."""
    return write_json(config.to_dict(), path, meta)


def _build(cls: type, data: object, prefix: str, skip: set[str] | None = None) -> Any:  # noqa: ANN401
    if not isinstance(data, dict):
        msg = f"{prefix or 'config'} must be an object"
        raise ConfigError(msg)
    hints = get_type_hints(cls)
    known = {f.name for f in fields(cls)} - (skip or set())
    unknown = sorted(set(data) - known)
    if unknown:
        msg = f"unknown key {_join(prefix, unknown[0])}"
        raise ConfigError(msg)
    values = {name: _coerce(data[name], hints[name], _join(prefix, name)) for name in known if name in data}
    return cls(**values)


def _join(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name


def _coerce(value: object, hint: Any, path: str) -> Any:  # noqa: ANN401, C901, PLR0911
    origin = get_origin(hint)
    if origin in (Union, types.UnionType):
        args = get_args(hint)
        if value is None and type(None) in args:
            return None
        (inner,) = [a for a in args if a is not type(None)]
        return _coerce(value, inner, path)
    if origin is tuple:
        if not isinstance(value, list | tuple):
            msg = f"{path} must be a list"
            raise ConfigError(msg)
        (item,) = [a for a in get_args(hint) if a is not Ellipsis]
        return tuple(_coerce(v, item, f"{path}[{i}]") for i, v in enumerate(value))
    if isinstance(hint, type) and hasattr(hint, "__dataclass_fields__"):
        return _build(hint, value, path)
    if hint is bool:
        if not isinstance(value, bool):
            msg = f"{path} must be a boolean"
            raise ConfigError(msg)
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            msg = f"{path} must be an integer, got {value!r}"
            raise ConfigError(msg)
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            msg = f"{path} must be a number, got {value!r}"
            raise ConfigError(msg)
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            msg = f"{path} must be a string, got {value!r}"
            raise ConfigError(msg)
        return value
    msg = f"{path}: unsupported field type {hint!r}"
    raise ConfigError(msg)
