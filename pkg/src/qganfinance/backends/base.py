"""Generator backend interface and the shared parameter-shift gradient."""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from qganfinance.circuit.ansatz import angle_table, layout
from qganfinance.errors import LengthMismatch, NumericalError
from qganfinance.logging_utils import get_logger
from qganfinance.settings import settings

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from qganfinance.schemas.circuit import CircuitSpec, ParameterSet

logger = get_logger("backends.base")

SHIFT = np.pi / 2


class GeneratorBackend(ABC):
    """Abstract base class for circuit simulators.

    A backend only has to evaluate expectation values for rows of an angle
    table; batching over noise vectors and the parameter-shift gradient are
    shared here.
    """

    name: ClassVar[str] = "base"
    description: ClassVar[str] = "Base generator backend"

    def __init__(self, max_batch_amplitudes: int | None = None) -> None:
        """Initialize the backend.

        Args:
            max_batch_amplitudes: Memory budget for one batched evaluation. Defaults to settings.

        """
        self.max_batch_amplitudes = max_batch_amplitudes or settings.max_batch_amplitudes
        self.logger = get_logger(f"backends.{self.name}")

    @abstractmethod
    def evaluate_angles(self, spec: CircuitSpec, angles: NDArray[np.float64]) -> NDArray[np.float64]:
        """Evaluate expectation values for each row of an angle table.

        Args:
            spec: Circuit geometry
            angles: (rows, R) rotation angles in layout column order

        Returns:
            (rows, 2n) interleaved <X>, <Z> per qubit

        """

    @abstractmethod
    def row_cost(self, spec: CircuitSpec) -> int:
        """Return the number of stored coefficients per simulated row."""

    def describe(self) -> str:
        """Short human-readable description used in logs and reports."""
        return self.name

    def rows_per_chunk(self, spec: CircuitSpec) -> int:
        """Return how many rows fit into the batch memory budget."""
        return max(1, self.max_batch_amplitudes // max(1, self.row_cost(spec)))

    def evaluate_chunked(self, spec: CircuitSpec, angles: NDArray[np.float64]) -> NDArray[np.float64]:
        """Evaluate an angle table in chunks that respect the memory budget."""
        rows = self.rows_per_chunk(spec)
        if len(angles) <= rows:
            return self.evaluate_angles(spec, angles)
        parts = [self.evaluate_angles(spec, angles[start : start + rows]) for start in range(0, len(angles), rows)]
        return np.concatenate(parts, axis=0)

    def expectations(self, spec: CircuitSpec, params: ParameterSet, noise: NDArray[np.float64]) -> NDArray[np.float64]:
        """Return the (B, 2n) generator outputs for a (B, nL) batch of noise vectors."""
        return self.evaluate_chunked(spec, angle_table(spec, params, noise))

    def gradient(
        self,
        spec: CircuitSpec,
        params: ParameterSet,
        noise: NDArray[np.float64],
        upstream: NDArray[np.float64],
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Return d(sum_b upstream_b . E_b) / d(thetas, lambdas) by the parameter-shift rule.

        Every parameter drives exactly one rotation, so the derivative with
        respect to rotation angle j is (E(a_j + pi/2) - E(a_j - pi/2)) / 2. A theta
        is its angle; a lambda picks up the chain-rule factor z.

        Args:
            spec: Circuit geometry
            params: Current parameters
            noise: (B, nL) noise batch, or one (nL,) vector
            upstream: (B, 2n) or (2n,) cotangent on the expectations

        Returns:
            (dtheta, dlambda) summed over the batch

        """
        started = time.perf_counter()
        z = np.atleast_2d(np.asarray(noise, dtype=np.float64))
        up = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
        if up.shape != (z.shape[0], spec.output_length):
            msg = f"upstream shape {up.shape} does not match ({z.shape[0]}, {spec.output_length})"
            raise LengthMismatch(msg)
        if not np.all(np.isfinite(up)):
            msg = "upstream cotangent is not finite"
            raise NumericalError(msg)

        base = angle_table(spec, params, z)
        batch, n_rot = base.shape
        dangle = np.zeros((batch, n_rot))
        if np.any(up):
            cols_per_chunk = max(1, self.rows_per_chunk(spec) // (2 * batch))
            for start in range(0, n_rot, cols_per_chunk):
                cols = np.arange(start, min(start + cols_per_chunk, n_rot))
                shifted = np.repeat(base[None, None], 2, axis=0).repeat(len(cols), axis=1)
                # shifted[s, c, b, :] is the base table with column cols[c] moved by +/- pi/2
                shifted[0, np.arange(len(cols)), :, cols] += SHIFT
                shifted[1, np.arange(len(cols)), :, cols] -= SHIFT
                values = self.evaluate_angles(spec, shifted.reshape(-1, n_rot)).reshape(2, len(cols), batch, -1)
                dangle[:, cols] = 0.5 * np.einsum("cbk,bk->bc", values[0] - values[1], up)

        lay = layout(spec)
        dtheta = dangle[:, lay.theta_columns].sum(axis=0)
        dlambda = (dangle[:, lay.lambda_columns] * z).sum(axis=0)
        self.logger.debug(
            "parameter-shift gradient: backend=%s batch=%d rotations=%d duration_ms=%.1f",
            self.describe(),
            batch,
            n_rot,
            (time.perf_counter() - started) * 1000,
        )
        return dtheta, dlambda
