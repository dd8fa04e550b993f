"""Tests for the MPS fidelity experiments and bond-dimension selection."""

from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from qganfinance.artifacts import read_csv
from qganfinance.errors import InvalidBond, TooManyQubits, ValidationError
from qganfinance.experiments.fidelity import (
    SWEEP_COLUMNS,
    BondStep,
    bond_convergence,
    fidelity_sweep,
    monotonicity_violations,
    random_instance,
    select_bond_dimension,
    summarize_fidelity,
    write_sweep,
)
from qganfinance.schemas.circuit import TWO_PI, CircuitSpec
from qganfinance.settings import settings


def test_random_instance_is_keyed_by_seed_and_depth() -> None:
    """One (depth, seed) always draws the same instance; lambdas start at one."""
    spec = CircuitSpec(4, 3)
    params, noise = random_instance(spec, 2)
    again, _ = random_instance(spec, 2)

    np.testing.assert_array_equal(params.thetas, again.thetas)
    np.testing.assert_array_equal(params.lambdas, 1.0)
    assert np.all((noise.z >= 0) & (noise.z <= TWO_PI))
    other, _ = random_instance(CircuitSpec(4, 2), 2)
    assert not np.array_equal(params.thetas[: len(other.thetas)], other.thetas)


def test_sweep_rows_and_exact_bond() -> None:
    """Every grid point is present and the exact bond reaches fidelity one."""
    frame = fidelity_sweep(CircuitSpec(4, 1), depths=[1, 3], bonds=[4, 1, 2], seeds=[0, 1])

    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 2 * 3 * 2
    assert sorted(frame["bond"].unique()) == [1, 2, 4]
    exact = frame[frame["bond"] == 4]
    np.testing.assert_allclose(exact["fidelity"], 1.0, atol=1e-10)
    assert np.all(exact["truncation_error"] < 1e-12)
    assert np.all(frame["fidelity"] <= 1.0 + 1e-10)
    assert monotonicity_violations(frame).empty


def test_sweep_guards() -> None:
    """The dense reference limit and bond range are checked up front."""
    with patch.object(settings, "dense_qubit_limit", 3), pytest.raises(TooManyQubits):
        fidelity_sweep(CircuitSpec(4, 1), [1], [2], [0])
    with pytest.raises(InvalidBond):
        fidelity_sweep(CircuitSpec(3, 1), [1], [0, 2], [0])
    with pytest.raises(ValidationError):
        fidelity_sweep(CircuitSpec(3, 1), [1], [], [0])


def test_summary_flags_decreasing_fidelity() -> None:
    """A drop in fidelity as the bond grows counts as a violation."""
    frame = pd.DataFrame(
        {
            "depth": [1, 1, 1, 1],
            "bond": [1, 2, 1, 2],
            "seed": [0, 0, 1, 1],
            "fidelity": [0.9, 0.8, 0.7, 0.99],
            "truncation_error": [0.1, 0.2, 0.3, 0.01],
        },
    )
    summary = summarize_fidelity(frame)

    assert summary["rows"] == 4
    assert summary["monotonicity_violations"] == 1
    assert summary["min_fidelity_at_largest_bond"] == pytest.approx(0.8)
    assert {row["bond"] for row in summary["by_depth_bond"]} == {1, 2}


def test_write_sweep(tmp_path: Path) -> None:
    """The sweep CSV keeps the column order and carries provenance."""
    frame = fidelity_sweep(CircuitSpec(3, 1), [1], [1, 2], [0])
    path = write_sweep(frame, tmp_path / "sweep.csv", {"config_hash": "abc"})

    pd.testing.assert_frame_equal(read_csv(path), frame, check_dtype=False)
    assert path.read_text(encoding="utf-8").startswith("# config_hash=abc")


def test_bond_convergence_and_selection() -> None:
    """Successive-bond fidelities settle at the exact bond, which is then selected."""
    spec = CircuitSpec(6, 3)
    params, noise = random_instance(spec, 0)
    steps = bond_convergence(spec, params, noise, [1, 2, 4, 8, 16])

    assert [(s.bond, s.next_bond) for s in steps] == [(1, 2), (2, 4), (4, 8), (8, 16)]
    assert steps[-1].fidelity == pytest.approx(1.0, abs=1e-10)
    pairs = bond_convergence(spec, params, noise, [1, 2, 4, 8, 16], all_pairs=True)
    assert len(pairs) == 10
    assert {(s.bond, s.next_bond): s.fidelity for s in pairs}[4, 8] == pytest.approx(steps[2].fidelity, abs=1e-12)
    assert select_bond_dimension(pairs) <= 8
    with pytest.raises(ValidationError):
        select_bond_dimension(steps)


def test_select_bond_dimension_rules() -> None:
    """The smallest bond close to every larger bond; the largest when none is."""
    steps = [
        BondStep(1, 2, 0.5),
        BondStep(1, 4, 0.5),
        BondStep(1, 8, 0.5),
        BondStep(2, 4, 0.999_999_9),
        BondStep(2, 8, 0.999_999_5),
        BondStep(4, 8, 1.0),
    ]
    assert select_bond_dimension(steps) == 2
    assert select_bond_dimension(steps, tolerance=1e-9) == 4
    assert select_bond_dimension([BondStep(1, 2, 0.5), BondStep(1, 4, 0.5), BondStep(2, 4, 0.6)]) == 4
    with pytest.raises(ValidationError):
        select_bond_dimension([])


def test_select_bond_dimension_checks_every_larger_bond() -> None:
    """A bond close to its neighbour but far from a larger bond is not selected."""
    steps = [BondStep(1, 2, 0.999_999_9), BondStep(1, 4, 0.99), BondStep(2, 4, 1.0)]

    assert select_bond_dimension(steps) == 2
