"""Exact dense simulation of the ansatz.

Amplitudes are stored as a (rows, 2**n) complex array; qubit q is bit q of the
basis-state index. A gate on qubit q views each row as (2**(n-1-q), 2, 2**q)
and updates the amplitude pairs in place, so no gate is ever expanded to a
2**n x 2**n matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd  # type: ignore[import-untyped]

from qganfinance.artifacts import write_csv
from qganfinance.backends.base import GeneratorBackend
from qganfinance.backends.registry import register_backend
from qganfinance.circuit.ansatz import angle_table, layout
from qganfinance.errors import NumericalError, TooManyQubits, ValidationError
from qganfinance.schemas.circuit import CircuitSpec, GateKind, NoiseVector, ParameterSet
from qganfinance.settings import settings

if TYPE_CHECKING:
    from numpy.typing import NDArray

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Statevector:
    """Normalized dense state of n qubits."""

    n_qubits: int
    amplitudes: NDArray[np.complex128]

    def __post_init__(self) -> None:
        """Check length and norm."""
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            msg = f"expected {1 << self.n_qubits} amplitudes, got {amps.shape}"
            raise ValidationError(msg)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            msg = f"state is not normalized (norm^2 = {norm!r})"
            raise NumericalError(msg)
        object.__setattr__(self, "amplitudes", amps)


def zero_states(rows: int, n_qubits: int) -> NDArray[np.complex128]:
    """Return `rows` copies of |0...0>."""
    psi = np.zeros((rows, 1 << n_qubits), dtype=np.complex128)
    psi[:, 0] = 1.0
    return psi


def apply_rotation(psi: NDArray[np.complex128], n_qubits: int, qubit: int, kind: GateKind, angles: NDArray[np.float64]) -> None:
    """Apply R_kind(angle_b) = exp(-i angle_b P / 2) to `qubit` of every row b, in place."""
    view = psi.reshape(psi.shape[0], 1 << (n_qubits - 1 - qubit), 2, 1 << qubit)
    half = 0.5 * angles[:, None, None]
    a0 = view[:, :, 0, :].copy()
    a1 = view[:, :, 1, :].copy()
    if kind is GateKind.RZ:
        phase = np.exp(-1j * half)
        view[:, :, 0, :] = phase * a0
        view[:, :, 1, :] = np.conj(phase) * a1
        return
    c, s = np.cos(half), np.sin(half)
    if kind is GateKind.RX:
        view[:, :, 0, :] = c * a0 - 1j * s * a1
        view[:, :, 1, :] = c * a1 - 1j * s * a0
    elif kind is GateKind.RY:
        view[:, :, 0, :] = c * a0 - s * a1
        view[:, :, 1, :] = c * a1 + s * a0
    else:
        msg = f"{kind} is not a rotation"
        raise ValidationError(msg)


def apply_cnot(psi: NDArray[np.complex128], n_qubits: int, control: int, target: int) -> None:
    """Flip `target` on the half of every row where `control` is 1, in place."""
    hi, lo = max(control, target), min(control, target)
    view = psi.reshape(psi.shape[0], 1 << (n_qubits - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if control > target:
        view[:, :, 1, :, :, :] = view[:, :, 1, :, ::-1, :].copy()
    else:
        view[:, :, :, :, 1, :] = view[:, :, ::-1, :, 1, :].copy()


def simulate(spec: CircuitSpec, angles: NDArray[np.float64]) -> NDArray[np.complex128]:
    """Run the layout for every row of an angle table and return (rows, 2**n) amplitudes."""
    n = spec.n_qubits
    if n > settings.dense_qubit_limit:
        msg = f"dense simulation of {n} qubits exceeds the limit of {settings.dense_qubit_limit}"
        raise TooManyQubits(msg)
    table = np.atleast_2d(angles)
    psi = zero_states(table.shape[0], n)
    for slot in layout(spec).slots:
        if slot.kind is GateKind.CNOT:
            apply_cnot(psi, n, slot.qubits[0], slot.qubits[1])
        else:
            apply_rotation(psi, n, slot.qubits[0], slot.kind, table[:, slot.column])
    return psi


def expectation_rows(psi: NDArray[np.complex128], n_qubits: int) -> NDArray[np.float64]:
    """Return (rows, 2n) interleaved <X>_q, <Z>_q for a batch of states."""
    out = np.empty((psi.shape[0], 2 * n_qubits))
    for q in range(n_qubits):
        view = psi.reshape(psi.shape[0], 1 << (n_qubits - 1 - q), 2, 1 << q)
        a0, a1 = view[:, :, 0, :], view[:, :, 1, :]
        out[:, 2 * q] = 2.0 * np.real(np.sum(np.conj(a0) * a1, axis=(1, 2)))
        out[:, 2 * q + 1] = np.sum(np.abs(a0) ** 2, axis=(1, 2)) - np.sum(np.abs(a1) ** 2, axis=(1, 2))
    # rounding guard: Pauli expectations are bounded by 1
    return np.clip(out, -1.0, 1.0)


def run(spec: CircuitSpec, params: ParameterSet, noise: NoiseVector) -> Statevector:
    """Apply the ansatz to |0...0>.

    Raises:
        TooManyQubits: Above the dense memory guard.
        LengthMismatch: If parameters or noise do not match the layout.

    """
    psi = simulate(spec, angle_table(spec, params, noise.z))
    return Statevector(n_qubits=spec.n_qubits, amplitudes=psi[0])


def expectations(state: Statevector) -> NDArray[np.float64]:
    """Return the interleaved expectation vector of one state."""
    return expectation_rows(state.amplitudes[None, :], state.n_qubits)[0]


def gradient(
    spec: CircuitSpec,
    params: ParameterSet,
    noise: NoiseVector,
    upstream: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return (dtheta, dlambda) of upstream . expectations for one noise vector."""
    return StatevectorBackend().gradient(spec, params, noise.z, upstream)


def dump_amplitudes(state: Statevector, path: str | Path) -> Path:
    """Write the amplitudes as `index,re,im` CSV."""
    frame = pd.DataFrame(
        {
            "index": np.arange(len(state.amplitudes)),
            "re": state.amplitudes.real,
            "im": state.amplitudes.imag,
        },
    )
    return write_csv(frame, Path(path))


@register_backend
class StatevectorBackend(GeneratorBackend):
    """Exact dense backend."""

    name = "statevector"
    description = "Exact dense statevector simulation"

    def row_cost(self, spec: CircuitSpec) -> int:
        """Amplitudes per simulated row."""
        return 1 << spec.n_qubits

    def evaluate_angles(self, spec: CircuitSpec, angles: NDArray[np.float64]) -> NDArray[np.float64]:
        """Simulate each row densely and measure."""
        return expectation_rows(simulate(spec, angles), spec.n_qubits)
