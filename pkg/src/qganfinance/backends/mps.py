"""Matrix product state simulation with bounded bond dimension.

Tensors are batched: site k holds an array of shape (rows, chi_{k-1}, 2, chi_k)
so that a batch of noise vectors (or of parameter-shifted angle tables) runs
through one sequence of numpy calls. Every row sees the same gate sequence,
so all rows share bond shapes; a truncating SVD keeps exactly
min(max_bond, 2 chi_left, 2 chi_right) values, zeros included.

The state is kept in mixed-canonical form around `center`: sites left of it
are left-isometries, sites right of it right-isometries. Two-site gates
first move the center onto the pair, so each local truncation is the
globally optimal one, and the kept singular values are renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd  # type: ignore[import-untyped]

from qganfinance.artifacts import write_csv
from qganfinance.backends.base import GeneratorBackend
from qganfinance.backends.registry import register_backend
from qganfinance.backends.statevector import Statevector
from qganfinance.circuit.ansatz import angle_table, layout
from qganfinance.errors import DimensionMismatch, InvalidBond
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.circuit import CircuitSpec, GateKind, NoiseVector, ParameterSet, Topology

if TYPE_CHECKING:
    from numpy.typing import NDArray

logger = get_logger("backends.mps")

TRUNCATION_LOG_THRESHOLD = 1e-8

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

# Two-site gates as G[out_left, out_right, in_left, in_right]
_CNOT_LEFT_CONTROL = np.zeros((2, 2, 2, 2), dtype=np.complex128)
_SWAP = np.zeros((2, 2, 2, 2), dtype=np.complex128)
for _i in range(2):
    for _j in range(2):
        _CNOT_LEFT_CONTROL[_i, _j ^ _i, _i, _j] = 1.0
        _SWAP[_j, _i, _i, _j] = 1.0
_CNOT_RIGHT_CONTROL = np.transpose(_CNOT_LEFT_CONTROL, (1, 0, 3, 2))


def rotation_matrices(kind: GateKind, angles: NDArray[np.float64]) -> NDArray[np.complex128]:
    """Return a (rows, 2, 2) stack of exp(-i angle P / 2)."""
    half = 0.5 * np.asarray(angles, dtype=np.float64)
    c, s = np.cos(half), np.sin(half)
    out = np.zeros((len(half), 2, 2), dtype=np.complex128)
    if kind is GateKind.RX:
        out[:, 0, 0] = c
        out[:, 1, 1] = c
        out[:, 0, 1] = -1j * s
        out[:, 1, 0] = -1j * s
    elif kind is GateKind.RY:
        out[:, 0, 0] = c
        out[:, 1, 1] = c
        out[:, 0, 1] = -s
        out[:, 1, 0] = s
    else:
        out[:, 0, 0] = np.exp(-1j * half)
        out[:, 1, 1] = np.exp(1j * half)
    return out


@dataclass
class MPSState:
    """Batch of open-boundary MPS sharing one bond structure.

    Attributes:
        tensors: n arrays of shape (rows, chi_left, 2, chi_right), chi_0 = chi_n = 1
        max_bond: Bond dimension cap chi
        center: Orthogonality center site
        truncation_error_log: Per-row accumulated discarded squared singular values
            (measured before renormalization)

    """

    tensors: list[NDArray[np.complex128]]
    max_bond: int
    center: int = 0
    truncation_error_log: NDArray[np.float64] = field(default_factory=lambda: np.zeros(1))

    @classmethod
    def product_zero(cls, n_qubits: int, max_bond: int, rows: int = 1) -> MPSState:
        """Return |0...0> for every row."""
        if max_bond < 1:
            msg = f"max_bond must be >= 1, got {max_bond}"
            raise InvalidBond(msg)
        tensors = []
        for _ in range(n_qubits):
            site = np.zeros((rows, 1, 2, 1), dtype=np.complex128)
            site[:, 0, 0, 0] = 1.0
            tensors.append(site)
        return cls(tensors=tensors, max_bond=max_bond, center=0, truncation_error_log=np.zeros(rows))

    @property
    def n_qubits(self) -> int:
        """Number of sites."""
        return len(self.tensors)

    @property
    def rows(self) -> int:
        """Number of states in the batch."""
        return self.tensors[0].shape[0]

    @property
    def bond_dims(self) -> list[int]:
        """Internal bond dimensions chi_1 .. chi_{n-1}."""
        return [t.shape[3] for t in self.tensors[:-1]]

    @property
    def truncation_error(self) -> float:
        """Accumulated discarded weight of the first row."""
        return float(self.truncation_error_log[0])

    def storage(self) -> int:
        """Number of stored complex coefficients per row."""
        return sum(int(np.prod(t.shape[1:])) for t in self.tensors)

    def copy(self) -> MPSState:
        """Deep copy."""
        return MPSState(
            tensors=[t.copy() for t in self.tensors],
            max_bond=self.max_bond,
            center=self.center,
            truncation_error_log=self.truncation_error_log.copy(),
        )

    def row(self, index: int) -> MPSState:
        """Return row `index` as a single-state MPS."""
        return MPSState(
            tensors=[t[index : index + 1].copy() for t in self.tensors],
            max_bond=self.max_bond,
            center=self.center,
            truncation_error_log=self.truncation_error_log[index : index + 1].copy(),
        )

    # --- canonical form -------------------------------------------------

    def _shift_right(self) -> None:
        k = self.center
        site = self.tensors[k]
        rows, chi_l, _, chi_r = site.shape
        q, r = np.linalg.qr(site.reshape(rows, chi_l * 2, chi_r))
        self.tensors[k] = q.reshape(rows, chi_l, 2, q.shape[-1])
        self.tensors[k + 1] = np.einsum("bij,bjkl->bikl", r, self.tensors[k + 1])
        self.center = k + 1

    def _shift_left(self) -> None:
        k = self.center
        site = self.tensors[k]
        rows, chi_l, _, chi_r = site.shape
        q, r = np.linalg.qr(np.swapaxes(site.reshape(rows, chi_l, 2 * chi_r), 1, 2))
        self.tensors[k] = np.swapaxes(q, 1, 2).reshape(rows, q.shape[-1], 2, chi_r)
        self.tensors[k - 1] = np.einsum("blir,bkr->blik", self.tensors[k - 1], r)
        self.center = k - 1

    def move_center(self, site: int) -> None:
        """Move the orthogonality center to `site` by QR sweeps."""
        while self.center < site:
            self._shift_right()
        while self.center > site:
            self._shift_left()

    # --- gates ----------------------------------------------------------

    def apply_single(self, site: int, matrices: NDArray[np.complex128]) -> None:
        """Contract a (rows, 2, 2) stack of unitaries into one site."""
        self.tensors[site] = np.einsum("bij,bljr->blir", matrices, self.tensors[site])

    def apply_two_site(self, site: int, gate: NDArray[np.complex128], *, move_right: bool = True) -> None:
        """Apply a (2,2,2,2) gate to sites (site, site+1), then SVD-truncate.

        The center ends on site+1 when `move_right`, else on `site`.
        """
        self.move_center(site if move_right else site + 1)
        left, right = self.tensors[site], self.tensors[site + 1]
        rows, chi_l = left.shape[0], left.shape[1]
        chi_r = right.shape[3]
        theta = np.einsum("blir,brjs->blijs", left, right)
        theta = np.einsum("pqij,blijs->blpqs", gate, theta).reshape(rows, chi_l * 2, 2 * chi_r)

        u, s, vh = np.linalg.svd(theta, full_matrices=False)
        keep = min(self.max_bond, chi_l * 2, 2 * chi_r)
        total = np.sum(s**2, axis=1)
        kept = np.sum(s[:, :keep] ** 2, axis=1)
        discarded = np.where(total > 0, 1.0 - kept / np.where(total > 0, total, 1.0), 0.0)
        discarded = np.maximum(discarded, 0.0)
        self.truncation_error_log = self.truncation_error_log + discarded
        if keep < s.shape[1] and float(np.max(discarded)) > TRUNCATION_LOG_THRESHOLD:
            logger.debug("Truncated bond %d to %d: max discarded weight %.3e", site, keep, float(np.max(discarded)))

        u, s, vh = u[:, :, :keep], s[:, :keep], vh[:, :keep, :]
        s = s / np.linalg.norm(s, axis=1, keepdims=True)
        if move_right:
            self.tensors[site] = u.reshape(rows, chi_l, 2, keep)
            self.tensors[site + 1] = (s[:, :, None] * vh).reshape(rows, keep, 2, chi_r)
            self.center = site + 1
        else:
            self.tensors[site] = (u * s[:, None, :]).reshape(rows, chi_l, 2, keep)
            self.tensors[site + 1] = vh.reshape(rows, keep, 2, chi_r)
            self.center = site

    def apply_cnot(self, control: int, target: int) -> None:
        """Apply CNOT; non-adjacent pairs go through a truncated swap network."""
        lo, hi = min(control, target), max(control, target)
        if hi - lo == 1:
            gate = _CNOT_LEFT_CONTROL if control < target else _CNOT_RIGHT_CONTROL
            self.apply_two_site(lo, gate)
            return
        # carry the lower qubit rightward until it neighbours the upper one
        for k in range(lo, hi - 1):
            self.apply_two_site(k, _SWAP, move_right=True)
        gate = _CNOT_LEFT_CONTROL if control < target else _CNOT_RIGHT_CONTROL
        self.apply_two_site(hi - 1, gate, move_right=False)
        for k in range(hi - 2, lo - 1, -1):
            self.apply_two_site(k, _SWAP, move_right=False)

    # --- contraction ----------------------------------------------------

    def to_dense(self) -> NDArray[np.complex128]:
        """Contract to (rows, 2**n) amplitudes with qubit q as bit q."""
        n = self.n_qubits
        psi = self.tensors[0][:, 0, :, :]
        for site in self.tensors[1:]:
            psi = np.einsum("bar,brjs->bajs", psi, site).reshape(self.rows, -1, site.shape[3])
        psi = psi.reshape((self.rows,) + (2,) * n)
        # axis 1 is site 0; little-endian index wants qubit n-1 outermost
        return psi.transpose(0, *range(n, 0, -1)).reshape(self.rows, 1 << n)

    def norms(self) -> NDArray[np.float64]:
        """Return <psi|psi> per row."""
        return np.real(overlap(self, self))


def overlap(a: MPSState, b: MPSState) -> NDArray[np.complex128]:
    """Return <a|b> per row by transfer-matrix contraction."""
    if a.n_qubits != b.n_qubits:
        msg = f"states act on {a.n_qubits} and {b.n_qubits} qubits"
        raise DimensionMismatch(msg)
    env = np.ones((a.rows, 1, 1), dtype=np.complex128)
    for ta, tb in zip(a.tensors, b.tensors, strict=True):
        env = np.einsum("bxy,bxiz,byiw->bzw", env, np.conj(ta), tb)
    return env[:, 0, 0]


def run_angles(spec: CircuitSpec, angles: NDArray[np.float64], max_bond: int) -> MPSState:
    """Run the layout for every row of an angle table."""
    table = np.atleast_2d(angles)
    state = MPSState.product_zero(spec.n_qubits, max_bond, rows=table.shape[0])
    for slot in layout(spec).slots:
        if slot.kind is GateKind.CNOT:
            state.apply_cnot(slot.qubits[0], slot.qubits[1])
        else:
            state.apply_single(slot.qubits[0], rotation_matrices(slot.kind, table[:, slot.column]))
    return state


def expectation_rows(state: MPSState) -> NDArray[np.float64]:
    """Return (rows, 2n) interleaved <X>_q, <Z>_q; the input state is not modified."""
    work = state.copy()
    work.move_center(0)
    out = np.empty((work.rows, 2 * work.n_qubits))
    for q in range(work.n_qubits):
        work.move_center(q)
        site = work.tensors[q]
        rho = np.einsum("blir,bljr->bij", site, np.conj(site))
        out[:, 2 * q] = np.real(np.einsum("bij,ji->b", rho, _PAULI_X))
        out[:, 2 * q + 1] = np.real(np.einsum("bij,ji->b", rho, _PAULI_Z))
    # rounding guard: Pauli expectations are bounded by 1
    return np.clip(out, -1.0, 1.0)


def mps_run(spec: CircuitSpec, params: ParameterSet, noise: NoiseVector, max_bond: int) -> MPSState:
    """Simulate the ansatz on |0...0> with bond dimension capped at `max_bond`.

    Raises:
        InvalidBond: If max_bond < 1.
        LengthMismatch: If parameters or noise do not match the layout.

    """
    if max_bond < 1:
        msg = f"max_bond must be >= 1, got {max_bond}"
        raise InvalidBond(msg)
    state = run_angles(spec, angle_table(spec, params, noise.z), max_bond)
    if spec.topology is Topology.RING:
        logger.debug("Ring CNOT applied through %d swaps", 2 * (spec.n_qubits - 2))
    return state


def mps_expectations(state: MPSState) -> NDArray[np.float64]:
    """Return the interleaved expectation vector of a single-row state."""
    return expectation_rows(state)[0]


def fidelity_dense(state: MPSState, reference: Statevector) -> float:
    """Return |<reference|state>|^2."""
    if state.n_qubits != reference.n_qubits:
        msg = f"MPS has {state.n_qubits} qubits, reference has {reference.n_qubits}"
        raise DimensionMismatch(msg)
    amplitude = np.vdot(reference.amplitudes, state.to_dense()[0])
    return float(np.abs(amplitude) ** 2)


def fidelity_mps(a: MPSState, b: MPSState) -> float:
    """Return |<a|b>|^2 in O(n chi^3)."""
    return float(np.abs(overlap(a, b)[0]) ** 2)


def mps_gradient(
    spec: CircuitSpec,
    params: ParameterSet,
    noise: NoiseVector,
    max_bond: int,
    upstream: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Parameter-shift gradient of upstream . expectations on the truncated simulator."""
    return MPSBackend(max_bond=max_bond).gradient(spec, params, noise.z, upstream)


def bond_spectra(state: MPSState) -> list[NDArray[np.float64]]:
    """Return normalized Schmidt coefficients of every internal bond (first row)."""
    work = state.row(0)
    work.move_center(0)
    spectra = []
    for k in range(work.n_qubits - 1):
        site = work.tensors[k]
        _, chi_l, _, chi_r = site.shape
        u, s, vh = np.linalg.svd(site[0].reshape(chi_l * 2, chi_r), full_matrices=False)
        work.tensors[k] = u.reshape(1, chi_l, 2, -1)
        carry = (s[:, None] * vh)[None]
        work.tensors[k + 1] = np.einsum("bij,bjkl->bikl", carry, work.tensors[k + 1])
        work.center = k + 1
        norm = np.linalg.norm(s)
        spectra.append(np.sort(s / norm if norm > 0 else s)[::-1])
    return spectra


def entanglement_entropy(state: MPSState) -> NDArray[np.float64]:
    """Return the von Neumann entropy -sum p ln p of every internal bond."""
    entropies = []
    for spectrum in bond_spectra(state):
        p = spectrum**2
        p = p[p > 0]
        entropies.append(float(-np.sum(p * np.log(p))))
    return np.asarray(entropies)


def dump_spectra(state: MPSState, path: str | Path) -> Path:
    """Write `bond,index,singular_value` rows plus per-site tensor shapes as a CSV."""
    records = [
        {"bond": bond, "index": i, "singular_value": float(value)}
        for bond, spectrum in enumerate(bond_spectra(state))
        for i, value in enumerate(spectrum)
    ]
    return write_csv(
        pd.DataFrame.from_records(records, columns=["bond", "index", "singular_value"]),
        Path(path),
        {"shapes": ";".join("x".join(str(d) for d in t.shape[1:]) for t in state.tensors)},
    )


@register_backend
class MPSBackend(GeneratorBackend):
    """Bond-dimension-limited MPS backend."""

    name = "mps"
    description = "Matrix product state simulation with SVD truncation"

    def __init__(self, max_bond: int = 8, max_batch_amplitudes: int | None = None) -> None:
        """Initialize with a bond dimension cap.

        Raises:
            InvalidBond: If max_bond < 1.

        """
        if max_bond < 1:
            msg = f"max_bond must be >= 1, got {max_bond}"
            raise InvalidBond(msg)
        super().__init__(max_batch_amplitudes)
        self.max_bond = max_bond

    def describe(self) -> str:
        """Name with bond dimension."""
        return f"mps(chi={self.max_bond})"

    def row_cost(self, spec: CircuitSpec) -> int:
        """Upper bound of coefficients per row, dominated by the two-site SVD workspace."""
        return 4 * spec.n_qubits * self.max_bond**2

    def evaluate_angles(self, spec: CircuitSpec, angles: NDArray[np.float64]) -> NDArray[np.float64]:
        """Simulate each row as an MPS and measure."""
        return expectation_rows(run_angles(spec, angles, self.max_bond))
