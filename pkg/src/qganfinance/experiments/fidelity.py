"""Fidelity of bond-limited MPS simulation against the exact state.

For every (depth, seed) a random circuit instance is drawn once, with thetas
from U[0, 2*pi), lambdas equal to 1 and noise from U[0, 2*pi). Every bond
dimension is then run on that same instance, so rows of one (depth, seed)
differ only in the truncation.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, replace
from itertools import combinations, pairwise
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd  # type: ignore[import-untyped]

from qganfinance.artifacts import write_csv
from qganfinance.backends.mps import fidelity_mps, mps_run, run_angles
from qganfinance.backends.statevector import simulate
from qganfinance.circuit.ansatz import angle_table, init_parameters, sample_noise_batch
from qganfinance.errors import InvalidBond, TooManyQubits, ValidationError
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.circuit import CircuitSpec, NoiseVector, ParameterSet
from qganfinance.settings import settings
from qganfinance.training.seeding import Stream, substream

logger = get_logger("experiments.fidelity")

SWEEP_COLUMNS = ["depth", "bond", "seed", "fidelity", "truncation_error"]
MONOTONE_TOLERANCE = 1e-9


def random_instance(spec: CircuitSpec, seed: int) -> tuple[ParameterSet, NoiseVector]:
    """Draw the benchmark parameters and noise for one (depth, seed)."""
    rng = substream(seed, Stream.FIDELITY, spec.n_layers)
    params = init_parameters(spec, rng)
    return params, NoiseVector(z=sample_noise_batch(rng, spec, 1)[0])


def _check_bonds(bonds: Sequence[int]) -> list[int]:
    if not bonds:
        msg = "bond list is empty"
        raise ValidationError(msg)
    if min(bonds) < 1:
        msg = f"bond dimensions must be >= 1, got {min(bonds)}"
        raise InvalidBond(msg)
    return sorted(set(bonds))


def fidelity_sweep(
    spec: CircuitSpec,
    depths: Sequence[int],
    bonds: Sequence[int],
    seeds: Sequence[int],
) -> pd.DataFrame:
    """Return one row per (depth, bond, seed) with the fidelity to the dense state.

    `spec.n_layers` is replaced by each depth in turn.

    Raises:
        TooManyQubits: If the dense reference does not fit the memory guard.
        InvalidBond: If a bond dimension is below 1.

    """
    if spec.n_qubits > settings.dense_qubit_limit:
        msg = f"dense reference needs n <= {settings.dense_qubit_limit}, got {spec.n_qubits}"
        raise TooManyQubits(msg)
    bond_list = _check_bonds(bonds)
    records = []
    for depth in depths:
        circuit = replace(spec, n_layers=depth)
        instances = [random_instance(circuit, seed) for seed in seeds]
        angles = np.vstack([angle_table(circuit, params, noise.z) for params, noise in instances])
        exact = simulate(circuit, angles)
        for bond in bond_list:
            state = run_angles(circuit, angles, bond)
            amplitudes = np.sum(np.conj(exact) * state.to_dense(), axis=1)
            fidelities = np.abs(amplitudes) ** 2
            records.extend(
                {
                    "depth": depth,
                    "bond": bond,
                    "seed": seed,
                    "fidelity": float(fidelities[i]),
                    "truncation_error": float(state.truncation_error_log[i]),
                }
                for i, seed in enumerate(seeds)
            )
        logger.info("Fidelity sweep: depth=%d done (%d bonds, %d seeds)", depth, len(bond_list), len(seeds))
    return pd.DataFrame.from_records(records, columns=SWEEP_COLUMNS)


def monotonicity_violations(frame: pd.DataFrame, tolerance: float = MONOTONE_TOLERANCE) -> pd.DataFrame:
    """Rows where fidelity drops by more than `tolerance` as the bond grows."""
    ordered = frame.sort_values(["depth", "seed", "bond"])
    previous = ordered.groupby(["depth", "seed"])["fidelity"].shift(1)
    return ordered[ordered["fidelity"] < previous - tolerance]


def summarize_fidelity(frame: pd.DataFrame, tolerance: float = MONOTONE_TOLERANCE) -> dict[str, Any]:
    """Mean/min fidelity per (depth, bond) and the monotonicity check."""
    table = frame.groupby(["depth", "bond"])["fidelity"].agg(["mean", "min"]).reset_index()
    violations = monotonicity_violations(frame, tolerance)
    largest = frame[frame["bond"] == frame["bond"].max()]["fidelity"]
    summary = {
        "rows": len(frame),
        "monotonicity_violations": len(violations),
        "min_fidelity_at_largest_bond": float(largest.min()) if len(largest) else float("nan"),
        "by_depth_bond": table.to_dict("records"),
    }
    if len(violations):
        logger.warning("Fidelity decreased with bond dimension at %d (depth, seed) points", len(violations))
    return summary


def write_sweep(frame: pd.DataFrame, path: str | Path, meta: dict[str, Any] | None = None) -> Path:
    """Write the sweep as `depth,bond,seed,fidelity,truncation_error`."""
    return write_csv(frame[SWEEP_COLUMNS], Path(path), meta)


@dataclass(frozen=True)
class BondStep:
    """Fidelity between the MPS states at two bond dimensions, `bond` < `next_bond`."""

    bond: int
    next_bond: int
    fidelity: float


def bond_convergence(
    spec: CircuitSpec,
    params: ParameterSet,
    noise: NoiseVector,
    bonds: Sequence[int],
    *,
    all_pairs: bool = False,
) -> list[BondStep]:
    """Fidelities between MPS runs at successive bond dimensions.

    With `all_pairs` every bond is compared with every larger one, which is
    what `select_bond_dimension` needs. No dense reference is involved, so this
    works above the dense memory guard.
    """
    bond_list = _check_bonds(bonds)
    states = [mps_run(spec, params, noise, bond) for bond in bond_list]
    pairs = combinations(range(len(states)), 2) if all_pairs else pairwise(range(len(states)))
    steps = [BondStep(bond_list[i], bond_list[j], fidelity_mps(states[i], states[j])) for i, j in pairs]
    for step in steps:
        logger.debug("F(chi=%d, chi=%d) = %.12f", step.bond, step.next_bond, step.fidelity)
    return steps


def select_bond_dimension(steps: Sequence[BondStep], tolerance: float = 1e-6) -> int:
    """Smallest bond whose fidelity to every larger bond is >= 1 - tolerance.

    `steps` must hold every (bond, larger bond) pair, as produced by
    `bond_convergence(..., all_pairs=True)`. Returns the largest bond when no
    smaller one qualifies.

    Raises:
        ValidationError: If `steps` is empty or a pair is missing.

    """
    if not steps:
        msg = "no convergence steps"
        raise ValidationError(msg)
    fidelity = {(s.bond, s.next_bond): s.fidelity for s in steps}
    bonds = sorted({b for pair in fidelity for b in pair})
    missing = [pair for pair in combinations(bonds, 2) if pair not in fidelity]
    if missing:
        msg = f"missing fidelities for bond pairs {missing}"
        raise ValidationError(msg)
    for i, bond in enumerate(bonds[:-1]):
        if all(fidelity[bond, larger] >= 1.0 - tolerance for larger in bonds[i + 1 :]):
            return bond
    return bonds[-1]

