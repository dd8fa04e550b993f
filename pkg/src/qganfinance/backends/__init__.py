"""Circuit simulators. Importing this package registers every backend."""

from qganfinance.backends.base import GeneratorBackend
from qganfinance.backends.mps import MPSBackend, MPSState
from qganfinance.backends.registry import backend_descriptions, create_backend, register_backend
from qganfinance.backends.statevector import Statevector, StatevectorBackend

__all__ = [
    "GeneratorBackend",
    "MPSBackend",
    "MPSState",
    "Statevector",
    "StatevectorBackend",
    "backend_descriptions",
    "create_backend",
    "register_backend",
]
