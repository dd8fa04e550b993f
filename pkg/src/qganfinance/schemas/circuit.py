"""Schemas describing the generator circuit and its parameters."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from qganfinance.errors import ValidationError

MIN_QUBITS = 2
TWO_PI = 2.0 * np.pi


class Topology(str, Enum):
    """Entangling pattern inside each layer."""

    CHAIN = "chain"
    RING = "ring"


class GateKind(str, Enum):
    """Gate alphabet of the ansatz."""

    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"


class ParamKind(str, Enum):
    """Which parameter vector feeds a rotation."""

    THETA = "theta"
    LAMBDA = "lambda"


@dataclass(frozen=True)
class CircuitSpec:
    """Ansatz geometry: qubit count, layer count and topology."""

    n_qubits: int
    n_layers: int
    topology: Topology = Topology.CHAIN

    def __post_init__(self) -> None:
        """Validate the geometry."""
        if self.n_qubits < MIN_QUBITS:
            msg = f"n_qubits must be >= {MIN_QUBITS}, got {self.n_qubits}"
            raise ValidationError(msg)
        if self.n_layers < 1:
            msg = f"n_layers must be >= 1, got {self.n_layers}"
            raise ValidationError(msg)
        object.__setattr__(self, "topology", Topology(self.topology))

    @property
    def output_length(self) -> int:
        """Return the generated window length 2n."""
        return 2 * self.n_qubits


@dataclass(frozen=True)
class ParameterSet:
    """Trainable rotation angles (thetas) and noise scales (lambdas)."""

    thetas: NDArray[np.float64]
    lambdas: NDArray[np.float64]

    def __post_init__(self) -> None:
        """Require finite one-dimensional vectors."""
        for name in ("thetas", "lambdas"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                msg = f"{name} must be a finite 1-D vector"
                raise ValidationError(msg)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        """Return the total number of trainable parameters."""
        return len(self.thetas) + len(self.lambdas)

    def flat(self) -> NDArray[np.float64]:
        """Return thetas followed by lambdas as one vector."""
        return np.concatenate([self.thetas, self.lambdas])

    def with_flat(self, values: NDArray[np.float64]) -> ParameterSet:
        """Return a copy with parameters replaced by a flat vector."""
        split = len(self.thetas)
        return ParameterSet(thetas=np.array(values[:split]), lambdas=np.array(values[split:]))


@dataclass(frozen=True)
class NoiseVector:
    """One classical noise realization, uniform on [0, 2*pi]."""

    z: NDArray[np.float64]

    def __post_init__(self) -> None:
        """Check the [0, 2*pi] range."""
        arr = np.asarray(self.z, dtype=np.float64)
        if arr.ndim != 1 or np.any(arr < 0.0) or np.any(arr > TWO_PI):
            msg = "noise entries must lie in [0, 2*pi]"
            raise ValidationError(msg)
        object.__setattr__(self, "z", arr)


@dataclass(frozen=True)
class Gate:
    """One gate of a concrete program; rotations carry an angle, CNOT does not."""

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def to_text(self) -> str:
        """Render as `GATE q [q2] angle`."""
        wires = " ".join(str(q) for q in self.qubits)
        if self.angle is None:
            return f"{self.kind.value} {wires}"
        return f"{self.kind.value} {wires} {self.angle!r}"


@dataclass(frozen=True)
class GateProgram:
    """Ordered gate list followed by X/Z measurement of every qubit."""

    n_qubits: int
    gates: tuple[Gate, ...]

    def __len__(self) -> int:
        """Return the number of gates (measurement markers excluded)."""
        return len(self.gates)

    def to_text(self) -> str:
        """Serialize to the line-based debugging format."""
        lines = [f"QUBITS {self.n_qubits}"]
        lines.extend(gate.to_text() for gate in self.gates)
        lines.extend(f"MEASURE {q}" for q in range(self.n_qubits))
        return "\n".join(lines) + "\n"
