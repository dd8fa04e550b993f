"""Tests for the ansatz layout, programs and noise sampling."""

import numpy as np
import pytest

from qganfinance.circuit.ansatz import (
    angle_table,
    build_program,
    gate_count,
    init_parameters,
    layout,
    noise_length,
    parameter_count,
    sample_noise,
    sample_noise_batch,
    to_text,
)
from qganfinance.errors import LengthMismatch, ValidationError
from qganfinance.schemas.circuit import TWO_PI, CircuitSpec, GateKind, NoiseVector, ParameterSet, ParamKind, Topology


def test_parameter_count_four_qubits_two_layers() -> None:
    """(n=4, L=2) has 36 thetas and 8 lambdas."""
    spec = CircuitSpec(4, 2)

    assert parameter_count(spec) == (36, 8)
    assert noise_length(spec) == 8


def test_gate_count_matches_program_length() -> None:
    """The program has L(3n + (n-1) + ring + n) + 3n gates."""
    for topology in Topology:
        spec = CircuitSpec(4, 3, topology)
        params = init_parameters(spec, np.random.default_rng(0))
        program = build_program(spec, params, sample_noise(1, spec))

        assert len(program) == gate_count(spec)


def test_layout_maps_every_parameter_to_one_rotation() -> None:
    """Each theta and each lambda drives exactly one rotation column."""
    spec = CircuitSpec(3, 2, Topology.RING)
    lay = layout(spec)
    thetas = [s for s in lay.slots if s.param is ParamKind.THETA]
    lambdas = [s for s in lay.slots if s.param is ParamKind.LAMBDA]

    assert sorted(s.index for s in thetas) == list(range(parameter_count(spec)[0]))
    assert sorted(s.index for s in lambdas) == list(range(parameter_count(spec)[1]))
    assert sorted(int(c) for c in np.concatenate([lay.theta_columns, lay.lambda_columns])) == list(range(lay.n_rotations))
    assert all(s.kind is GateKind.RX for s in lambdas)


def test_ring_adds_wraparound_cnot() -> None:
    """Ring topology adds CNOT(0, n-1) after the staircase of every layer."""
    chain = [s.qubits for s in layout(CircuitSpec(4, 1)).slots if s.kind is GateKind.CNOT]
    ring = [s.qubits for s in layout(CircuitSpec(4, 1, Topology.RING)).slots if s.kind is GateKind.CNOT]

    assert chain == [(0, 1), (1, 2), (2, 3)]
    assert ring == [*chain, (0, 3)]


def test_angle_table_uses_lambda_times_noise() -> None:
    """Uploading angles are lambda_i * z_i and theta angles are copied."""
    spec = CircuitSpec(2, 1)
    params = ParameterSet(thetas=np.arange(12, dtype=float), lambdas=np.array([2.0, 3.0]))
    table = angle_table(spec, params, np.array([[0.5, 1.0], [1.0, 2.0]]))
    lay = layout(spec)

    np.testing.assert_array_equal(table[:, lay.lambda_columns], [[1.0, 3.0], [2.0, 6.0]])
    np.testing.assert_array_equal(table[0, lay.theta_columns], np.arange(12))


def test_length_mismatch_is_rejected() -> None:
    """Parameters or noise of the wrong length raise LengthMismatch."""
    spec = CircuitSpec(2, 1)
    good = init_parameters(spec, np.random.default_rng(0))
    with pytest.raises(LengthMismatch):
        angle_table(spec, ParameterSet(thetas=good.thetas[:-1], lambdas=good.lambdas), np.zeros(2))
    with pytest.raises(LengthMismatch):
        angle_table(spec, good, np.zeros(3))


def test_noise_sampling_is_seeded_and_in_range() -> None:
    """Noise lies in [0, 2*pi) and a seed reproduces it."""
    spec = CircuitSpec(3, 2)
    first = sample_noise_batch(np.random.default_rng(5), spec, 50)
    second = sample_noise_batch(np.random.default_rng(5), spec, 50)

    np.testing.assert_array_equal(first, second)
    assert first.shape == (50, 6)
    assert np.all((first >= 0.0) & (first < TWO_PI))


def test_noise_vector_range_validation() -> None:
    """Noise outside [0, 2*pi] is rejected."""
    with pytest.raises(ValidationError):
        NoiseVector(z=np.array([0.1, -0.2]))


def test_init_parameters_distribution() -> None:
    """Thetas are drawn in [0, 2*pi) and lambdas start at 1."""
    params = init_parameters(CircuitSpec(3, 2), np.random.default_rng(3))

    assert np.all((params.thetas >= 0.0) & (params.thetas < TWO_PI))
    np.testing.assert_array_equal(params.lambdas, np.ones(6))


def test_program_text_lists_gates() -> None:
    """The text form starts with the qubit count and has one line per gate."""
    spec = CircuitSpec(2, 1)
    program = build_program(spec, init_parameters(spec, np.random.default_rng(0)), sample_noise(0, spec))
    lines = to_text(program).splitlines()

    assert lines[0] == "QUBITS 2"
    assert "CNOT 0 1" in lines
    assert sum(1 for line in lines if line.startswith(("RX", "RY", "RZ"))) == 14
