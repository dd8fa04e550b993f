"""Artifact writers shared by every command.

Every tabular artifact is RFC-4180 CSV preceded by `#`-prefixed provenance
lines (tool version, config hash, seed). JSON artifacts carry the same data
under a top-level "provenance" key. Floats are written with 17 significant
digits so that reading an artifact back is bit-exact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, cast

import pandas as pd  # type: ignore[import-untyped]

from qganfinance import __version__
from qganfinance.errors import ArtifactIOError, MissingFile

FLOAT_FORMAT = "%.17g"


def provenance(config_hash: str = "", seed: int | None = None, **extra: object) -> dict[str, Any]:
    """Build a provenance mapping for artifact headers."""
    record: dict[str, Any] = {"tool": "qganfinance", "version": __version__, "config_hash": config_hash}
    if seed is not None:
        record["seed"] = seed
    record.update(extra)
    return record


def write_csv(frame: pd.DataFrame, path: Path, meta: dict[str, Any] | None = None) -> Path:
    """Write a DataFrame as CSV with provenance comment lines."""
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open("w", encoding="utf-8", newline="") as f:
            for key, value in (meta or {}).items():
                f.write(f"# {key}={value}\r\n")
            frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\r\n")
    except OSError as exc:
        msg = f"Could not write {path}: {exc}"
        raise ArtifactIOError(msg) from exc
    return path


def read_csv(path: Path, **kwargs: Any) -> pd.DataFrame:  # noqa: ANN401
    """Read a CSV artifact, skipping provenance lines."""
    if not path.exists():
        raise MissingFile(path)
    try:
        return pd.read_csv(path, comment="#", float_precision="round_trip", **kwargs)
    except (OSError, ValueError) as exc:
        msg = f"Could not read {path}: {exc}"
        raise ArtifactIOError(msg) from exc


def read_meta(path: Path) -> dict[str, str]:
    """Return the `# key=value` provenance lines of a CSV artifact."""
    if not path.exists():
        raise MissingFile(path)
    meta: dict[str, str] = {}
    with path.open(encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
    return meta


def write_json(payload: dict[str, Any], path: Path, meta: dict[str, Any] | None = None) -> Path:
    """Write a JSON document with sorted keys and an optional provenance block."""
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"provenance": meta, **payload} if meta is not None else payload
    try:
        with path.open("w", encoding="utf-8") as f:
            json.dump(document, f, indent=2, sort_keys=True, allow_nan=False)
            f.write("\n")
    except (OSError, ValueError) as exc:
        msg = f"Could not write {path}: {exc}"
        raise ArtifactIOError(msg) from exc
    return path


def read_json(path: Path) -> dict[str, Any]:
    """Read a JSON artifact."""
    if not path.exists():
        raise MissingFile(path)
    try:
        with path.open(encoding="utf-8") as f:
            return cast("dict[str, Any]", json.load(f))
    except (OSError, json.JSONDecodeError) as exc:
        msg = f"Could not read {path}: {exc}"
        raise ArtifactIOError(msg) from exc


def write_key_values(values: dict[str, Any], path: Path) -> Path:
    """Write a `key=value` text sidecar."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={float(value)!r}" if isinstance(value, float) else f"{key}={value}" for key, value in values.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_key_values(path: Path) -> dict[str, str]:
    """Read a `key=value` text sidecar."""
    if not path.exists():
        raise MissingFile(path)
    result: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            key, _, value = line.partition("=")
            result[key.strip()] = value.strip()
    return result


def file_digest(path: Path) -> str:
    """Return the first 12 hex characters of a file's SHA-256."""
    if not path.exists():
        raise MissingFile(path)
    return hashlib.sha256(path.read_bytes()).hexdigest()[:12]
