"""Independent dense-matrix reference for circuit tests.

Gates are expanded to full 2**n x 2**n matrices with qubit q as bit q of the
basis index, which is slow but shares no code with the simulators.
"""

from functools import reduce

import numpy as np

from qganfinance.schemas.circuit import GateKind, GateProgram

PAULI = {
    GateKind.RX: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.RY: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.RZ: np.array([[1, 0], [0, -1]], dtype=complex),
}


def rotation(kind: GateKind, angle: float) -> np.ndarray:
    """exp(-i angle P / 2) from the matrix exponential of a Pauli."""
    p = PAULI[kind]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * p


def single_qubit_operator(n: int, qubit: int, matrix: np.ndarray) -> np.ndarray:
    """Embed a 2x2 matrix acting on `qubit` into the full space."""
    factors = [matrix if q == qubit else np.eye(2) for q in reversed(range(n))]
    return reduce(np.kron, factors)


def cnot_operator(n: int, control: int, target: int) -> np.ndarray:
    """Permutation matrix flipping bit `target` when bit `control` is set."""
    dim = 1 << n
    op = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        j = i ^ (1 << target) if (i >> control) & 1 else i
        op[j, i] = 1.0
    return op


def program_state(program: GateProgram) -> np.ndarray:
    """Apply every gate of a program to |0...0>."""
    n = program.n_qubits
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    for gate in program.gates:
        if gate.kind is GateKind.CNOT:
            psi = cnot_operator(n, gate.qubits[0], gate.qubits[1]) @ psi
        else:
            psi = single_qubit_operator(n, gate.qubits[0], rotation(gate.kind, gate.angle)) @ psi
    return psi


def expectations(psi: np.ndarray, n: int) -> np.ndarray:
    """Interleaved <X_q>, <Z_q> from full Pauli operators."""
    out = []
    for q in range(n):
        for pauli in (PAULI[GateKind.RX], PAULI[GateKind.RZ]):
            op = single_qubit_operator(n, q, pauli)
            out.append(np.real(np.vdot(psi, op @ psi)))
    return np.array(out)
