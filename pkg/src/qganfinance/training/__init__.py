"""Seeded WGAN-GP training of the quantum generator."""

from qganfinance.training.adam import AdamState, adam_step, adam_update
from qganfinance.training.checkpoint import Checkpoint, latest_checkpoint, load_checkpoint, save_checkpoint
from qganfinance.training.seeding import Stream, substream
from qganfinance.training.sweep import summarize_sweep, train_sweep
from qganfinance.training.trainer import TrainResult, critic_step, generator_gradient, generator_step, train

__all__ = [
    "AdamState",
    "Checkpoint",
    "Stream",
    "TrainResult",
    "adam_step",
    "adam_update",
    "critic_step",
    "generator_gradient",
    "generator_step",
    "latest_checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "substream",
    "summarize_sweep",
    "train",
    "train_sweep",
]
