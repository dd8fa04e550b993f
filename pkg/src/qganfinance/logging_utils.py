"""Logging utilities for qganfinance.

Console records go to stderr because stdout carries command results. A run
directory can additionally mirror every package record into its own log file.
"""

from __future__ import annotations

import logging
import sys
from contextlib import contextmanager
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterator
    from pathlib import Path

ROOT_LOGGER = "qganfinance"
RUN_LOG_FILE = "run.log"
CONSOLE_HANDLER = "console"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _level(name: str) -> int:
    return getattr(logging, name.upper(), logging.INFO)


def setup_logging(level: str = "INFO") -> logging.Logger:
    """Configure and return the package logger.

    Calling it again only changes the level.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        Configured logger instance

    """
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(_level(level))

    console = next((h for h in logger.handlers if h.get_name() == CONSOLE_HANDLER), None)
    if console is None:
        console = logging.StreamHandler(sys.stderr)
        console.set_name(CONSOLE_HANDLER)
        console.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(console)
    console.setLevel(_level(level))

    return logger


@contextmanager
def run_log(run_dir: Path) -> Iterator[Path]:
    """Append package records to `<run_dir>/run.log` while the block runs."""
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / RUN_LOG_FILE
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    logger = logging.getLogger(ROOT_LOGGER)
    logger.addHandler(handler)
    try:
        yield path
    finally:
        logger.removeHandler(handler)
        handler.close()


def get_logger(name: str | None = None) -> logging.Logger:
    """Get a logger instance.

    Args:
        name: Optional name for the logger (will be prefixed with qganfinance)

    Returns:
        Logger instance

    """
    if name:
        return logging.getLogger(f"{ROOT_LOGGER}.{name}")
    return logging.getLogger(ROOT_LOGGER)
