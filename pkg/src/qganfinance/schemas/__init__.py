"""Schema definitions for qganfinance."""

from qganfinance.schemas.circuit import CircuitSpec, Gate, GateKind, GateProgram, NoiseVector, ParameterSet, ParamKind, Topology
from qganfinance.schemas.metrics import AcfCurves, DistributionSummary, MetricsReport
from qganfinance.schemas.series import NormStats, PipelineConfig, PriceSeries, ReturnSeries, WindowBatch
from qganfinance.schemas.training import TRAIN_LOG_COLUMNS, AdamConfig, BackendKind, TrainConfig, TrainLog, TrainLogRow

__all__ = [
    "TRAIN_LOG_COLUMNS",
    "AcfCurves",
    "AdamConfig",
    "BackendKind",
    "CircuitSpec",
    "DistributionSummary",
    "Gate",
    "GateKind",
    "GateProgram",
    "MetricsReport",
    "NoiseVector",
    "NormStats",
    "ParamKind",
    "ParameterSet",
    "PipelineConfig",
    "PriceSeries",
    "ReturnSeries",
    "Topology",
    "TrainConfig",
    "TrainLog",
    "TrainLogRow",
    "WindowBatch",
]
