"""Hardware-efficient ansatz: layout, program building and noise sampling.

Each layer applies RX, RY, RZ to every qubit (qubit-major, three thetas per
qubit), a top-down CNOT staircase (plus CNOT(0, n-1) on a ring), then one
data-uploading RX(lambda * z) per qubit. A final RX, RY, RZ layer consumes the
last 3n thetas.

Backends never look at a GateProgram directly. They evaluate the compiled
`layout` against an angle table whose column j is the angle of rotation slot j,
which is how batches of noise vectors and shifted parameters are simulated
together.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from qganfinance.errors import LengthMismatch
from qganfinance.schemas.circuit import TWO_PI, CircuitSpec, Gate, GateKind, GateProgram, NoiseVector, ParameterSet, ParamKind, Topology

ROTATIONS = (GateKind.RX, GateKind.RY, GateKind.RZ)


@dataclass(frozen=True)
class Slot:
    """One gate position of the layout.

    Rotations carry the parameter vector they read and its index; for
    LAMBDA slots the same index selects the noise entry. `column` is the
    rotation's position in the angle table, -1 for CNOT.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    param: ParamKind | None = None
    index: int = -1
    column: int = -1


@dataclass(frozen=True)
class Layout:
    """Compiled slot sequence with index maps from parameters to angle columns."""

    spec: CircuitSpec
    slots: tuple[Slot, ...]
    theta_columns: NDArray[np.intp]
    lambda_columns: NDArray[np.intp]

    @property
    def n_rotations(self) -> int:
        """Return the number of angle columns."""
        return len(self.theta_columns) + len(self.lambda_columns)


def parameter_count(spec: CircuitSpec) -> tuple[int, int]:
    """Return (theta_count, lambda_count) = (3nL + 3n, nL)."""
    n, layers = spec.n_qubits, spec.n_layers
    return 3 * n * layers + 3 * n, n * layers


def noise_length(spec: CircuitSpec) -> int:
    """Return the number of noise entries, one per uploading gate."""
    return spec.n_qubits * spec.n_layers


def gate_count(spec: CircuitSpec) -> int:
    """Return L * (3n + (n - 1) + ring + n) + 3n."""
    n = spec.n_qubits
    ring = 1 if spec.topology is Topology.RING else 0
    return spec.n_layers * (3 * n + (n - 1) + ring + n) + 3 * n


@lru_cache(maxsize=64)
def layout(spec: CircuitSpec) -> Layout:
    """Compile the slot sequence for a circuit geometry."""
    n = spec.n_qubits
    slots: list[Slot] = []
    theta_cols: list[int] = []
    lambda_cols: list[int] = []

    def rotation_block() -> None:
        for q in range(n):
            for kind in ROTATIONS:
                theta_cols.append(len(theta_cols) + len(lambda_cols))
                slots.append(Slot(kind, (q,), ParamKind.THETA, len(theta_cols) - 1, theta_cols[-1]))

    for layer in range(spec.n_layers):
        rotation_block()
        slots.extend(Slot(GateKind.CNOT, (q, q + 1)) for q in range(n - 1))
        if spec.topology is Topology.RING:
            slots.append(Slot(GateKind.CNOT, (0, n - 1)))
        for q in range(n):
            column = len(theta_cols) + len(lambda_cols)
            lambda_cols.append(column)
            slots.append(Slot(GateKind.RX, (q,), ParamKind.LAMBDA, layer * n + q, column))
    rotation_block()

    return Layout(
        spec=spec,
        slots=tuple(slots),
        theta_columns=np.asarray(theta_cols, dtype=np.intp),
        lambda_columns=np.asarray(lambda_cols, dtype=np.intp),
    )


def check_lengths(spec: CircuitSpec, params: ParameterSet, noise: NDArray[np.float64] | None = None) -> None:
    """Raise LengthMismatch unless the vectors match `parameter_count`."""
    n_theta, n_lambda = parameter_count(spec)
    if len(params.thetas) != n_theta or len(params.lambdas) != n_lambda:
        msg = f"expected {n_theta} thetas and {n_lambda} lambdas, got {len(params.thetas)} and {len(params.lambdas)}"
        raise LengthMismatch(msg)
    if noise is not None and np.shape(noise)[-1] != n_lambda:
        msg = f"expected noise of length {n_lambda}, got {np.shape(noise)[-1]}"
        raise LengthMismatch(msg)


def angle_table(spec: CircuitSpec, params: ParameterSet, noise: NDArray[np.float64]) -> NDArray[np.float64]:
    """Return the (B, R) rotation angles for a (B, nL) batch of noise vectors."""
    z = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    check_lengths(spec, params, z)
    lay = layout(spec)
    table = np.empty((z.shape[0], lay.n_rotations))
    table[:, lay.theta_columns] = params.thetas
    table[:, lay.lambda_columns] = params.lambdas * z
    return table


def build_program(spec: CircuitSpec, params: ParameterSet, noise: NoiseVector) -> GateProgram:
    """Instantiate the ansatz for concrete parameters and one noise vector.

    Raises:
        LengthMismatch: If thetas, lambdas or noise do not match `parameter_count`.

    """
    angles = angle_table(spec, params, noise.z)[0]
    gates = tuple(
        Gate(slot.kind, slot.qubits, None if slot.column < 0 else float(angles[slot.column]))
        for slot in layout(spec).slots
    )
    return GateProgram(n_qubits=spec.n_qubits, gates=gates)


def sample_noise_batch(rng: np.random.Generator, spec: CircuitSpec, batch: int) -> NDArray[np.float64]:
    """Draw a (batch, nL) matrix of i.i.d. U[0, 2*pi) noise."""
    return rng.uniform(0.0, TWO_PI, size=(batch, noise_length(spec)))


def sample_noise(rng_seed: int, spec: CircuitSpec) -> NoiseVector:
    """Draw one noise vector deterministically from a seed."""
    return NoiseVector(z=sample_noise_batch(np.random.default_rng(rng_seed), spec, 1)[0])


def init_parameters(spec: CircuitSpec, rng: np.random.Generator) -> ParameterSet:
    """Draw thetas from U[0, 2*pi) and set every lambda to 1."""
    n_theta, n_lambda = parameter_count(spec)
    return ParameterSet(thetas=rng.uniform(0.0, TWO_PI, size=n_theta), lambdas=np.ones(n_lambda))


def to_text(program: GateProgram) -> str:
    """Serialize a program as `GATE q [q2] angle` lines."""
    return program.to_text()
