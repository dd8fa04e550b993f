"""Simulation experiments that are not part of training."""

from qganfinance.experiments.fidelity import (
    BondStep,
    bond_convergence,
    fidelity_sweep,
    monotonicity_violations,
    select_bond_dimension,
    summarize_fidelity,
    write_sweep,
)

__all__ = [
    "BondStep",
    "bond_convergence",
    "fidelity_sweep",
    "monotonicity_violations",
    "select_bond_dimension",
    "summarize_fidelity",
    "write_sweep",
]
