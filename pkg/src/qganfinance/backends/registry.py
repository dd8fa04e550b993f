"""Generator backends keyed by `BackendKind`.

Backend modules file their class here with `@register_backend` at import;
`qganfinance.backends` imports all of them, so every kind is available
once the package is loaded.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from qganfinance.errors import ConfigError
from qganfinance.logging_utils import get_logger
from qganfinance.schemas.training import BackendKind

if TYPE_CHECKING:
    from qganfinance.backends.base import GeneratorBackend

logger = get_logger("backends.registry")

_BACKENDS: dict[BackendKind, type[GeneratorBackend]] = {}


def register_backend(backend_class: type[GeneratorBackend]) -> type[GeneratorBackend]:
    """File a backend class under the kind named by its `name`."""
    kind = BackendKind(backend_class.name)
    _BACKENDS[kind] = backend_class
    logger.debug("Registered backend: %s", kind.value)
    return backend_class


def backend_descriptions() -> dict[BackendKind, str]:
    """Description of every registered backend, in kind order."""
    return {kind: _BACKENDS[kind].description for kind in BackendKind if kind in _BACKENDS}


def create_backend(kind: BackendKind | str, max_bond: int | None = None) -> GeneratorBackend:
    """Instantiate the backend of `kind`; `max_bond` only applies to MPS.

    Raises:
        ConfigError: If `kind` is not a known or registered backend.

    """
    try:
        resolved = BackendKind(kind)
    except ValueError:
        msg = f"Unknown backend {kind!r}; available: {', '.join(k.value for k in _BACKENDS)}"
        raise ConfigError(msg) from None
    backend_class = _BACKENDS.get(resolved)
    if backend_class is None:
        msg = f"Backend {resolved.value!r} is not registered"
        raise ConfigError(msg)
    if resolved is BackendKind.MPS and max_bond is not None:
        return backend_class(max_bond=max_bond)  # type: ignore[call-arg]
    return backend_class()
