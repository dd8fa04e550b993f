"""Counter-based random sub-streams derived from one run seed.

A stream is keyed by (seed, label, *counters), never by how many numbers an
earlier consumer drew, so resuming at epoch k or reordering evaluation does
not change any sampled value.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from qganfinance.errors import ValidationError


class Stream(str, Enum):
    """Labeled consumers of randomness."""

    NOISE = "noise"
    INIT = "init"
    EPSILONS = "epsilons"
    MINIBATCH = "minibatch"
    METRICS = "metrics"
    GENERATE = "generate"
    FIDELITY = "fidelity"


_STREAM_IDS = {stream: i for i, stream in enumerate(Stream)}


def substream(seed: int, stream: Stream, *counters: int) -> np.random.Generator:
    """Return a generator for one (seed, stream, counters) key."""
    if seed < 0 or any(c < 0 for c in counters):
        msg = "seeds and stream counters must be non-negative"
        raise ValidationError(msg)
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(_STREAM_IDS[Stream(stream)], *counters))
    return np.random.default_rng(sequence)
