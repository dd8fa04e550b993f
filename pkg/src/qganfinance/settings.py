"""Environment-driven settings for qganfinance."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _read_int_env(name: str, default: int) -> int:
    """Parse integer env vars while tolerating common markdown copy/paste artifacts."""
    raw_value = os.getenv(name)
    if raw_value is None:
        return default

    normalized_value = raw_value.strip().strip("`")
    if normalized_value == "":
        return default

    try:
        return int(normalized_value)
    except ValueError as exc:
        msg = f"Invalid integer value for {name}: {raw_value!r}"
        raise ValueError(msg) from exc


@dataclass
class Settings:
    """Process-wide settings loaded from environment variables."""

    # Logging
    log_level: str = field(default_factory=lambda: os.getenv("QGAN_LOG_LEVEL", "INFO"))

    # Artifacts
    runs_dir: Path = field(default_factory=lambda: Path(os.getenv("QGAN_RUNS_DIR", "./runs")))

    # Simulation budgets
    # Upper bound on amplitudes held at once by a batched statevector evaluation.
    max_batch_amplitudes: int = field(default_factory=lambda: _read_int_env("QGAN_MAX_BATCH_AMPLITUDES", 1 << 22))
    dense_qubit_limit: int = field(default_factory=lambda: _read_int_env("QGAN_DENSE_QUBIT_LIMIT", 24))

    def validate(self) -> None:
        """Validate numeric budgets."""
        if self.max_batch_amplitudes < 1:
            msg = "QGAN_MAX_BATCH_AMPLITUDES must be positive"
            raise ValueError(msg)
        if not 1 <= self.dense_qubit_limit <= 30:  # noqa: PLR2004
            msg = "QGAN_DENSE_QUBIT_LIMIT must lie in [1, 30]"
            raise ValueError(msg)


# Global settings instance
settings = Settings()
