"""Shared fixtures: seeded generators, small circuits and a synthetic price file."""

import logging
from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pytest

from qganfinance.critic.network import ConvLayer, CriticConfig
from qganfinance.data.io import write_price_csv
from qganfinance.data.synthetic import geometric_walk, student_t_returns
from qganfinance.logging_utils import ROOT_LOGGER
from qganfinance.schemas.circuit import CircuitSpec, Topology
from qganfinance.schemas.series import PriceSeries


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data."""
    return np.random.default_rng(1234)


@pytest.fixture
def small_spec() -> CircuitSpec:
    """Three qubits, two layers, chain entanglement."""
    return CircuitSpec(n_qubits=3, n_layers=2)


@pytest.fixture
def ring_spec() -> CircuitSpec:
    """Four qubits, two layers, ring entanglement."""
    return CircuitSpec(n_qubits=4, n_layers=2, topology=Topology.RING)


@pytest.fixture
def tiny_critic() -> CriticConfig:
    """A critic small enough for finite-difference checks on windows of length 6."""
    return CriticConfig(input_length=6, conv_layers=(ConvLayer(2, 3, 1), ConvLayer(3, 2, 2)), dense_layers=(4, 1), seed=7)


@pytest.fixture
def prices() -> PriceSeries:
    """Heavy-tailed synthetic price path of 400 business days."""
    return geometric_walk(student_t_returns(399, np.random.default_rng(99)))


@pytest.fixture
def price_csv(tmp_path: Path, prices: PriceSeries) -> Path:
    """The synthetic price path written as `date,close`."""
    return write_price_csv(prices, tmp_path / "prices.csv")


@pytest.fixture(autouse=True)
def _reset_logging() -> Iterator[None]:
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
