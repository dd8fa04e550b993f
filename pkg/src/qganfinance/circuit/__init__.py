"""Generator circuit: ansatz layout and gate programs."""

from qganfinance.circuit.ansatz import (
    Layout,
    Slot,
    angle_table,
    build_program,
    check_lengths,
    gate_count,
    init_parameters,
    layout,
    noise_length,
    parameter_count,
    sample_noise,
    sample_noise_batch,
    to_text,
)

__all__ = [
    "Layout",
    "Slot",
    "angle_table",
    "build_program",
    "check_lengths",
    "gate_count",
    "init_parameters",
    "layout",
    "noise_length",
    "parameter_count",
    "sample_noise",
    "sample_noise_batch",
    "to_text",
]
