"""Wasserstein critic and the reverse-mode engine it runs on."""

from qganfinance.critic.network import (
    ConvLayer,
    CriticConfig,
    CriticObjective,
    CriticParameters,
    Padding,
    backward,
    critic_objective,
    forward,
    gradient_penalty,
    init_parameters,
    load_parameters,
    save_parameters,
    scores,
)
from qganfinance.critic.tape import Tape, Var

__all__ = [
    "ConvLayer",
    "CriticConfig",
    "CriticObjective",
    "CriticParameters",
    "Padding",
    "Tape",
    "Var",
    "backward",
    "critic_objective",
    "forward",
    "gradient_penalty",
    "init_parameters",
    "load_parameters",
    "save_parameters",
    "scores",
]
