"""Command-line entry point.

Commands: preprocess, train, generate, evaluate, fidelity-sweep, sweep.
Each returns 0 on success and the exit code of the raised QganError otherwise
(2 validation, 3 artifact I/O, 4 numerical).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections.abc import Callable, Sequence
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from qganfinance import __version__
from qganfinance.artifacts import file_digest, provenance, write_csv, write_json
from qganfinance.config import RunConfig, load_config
from qganfinance.data.io import is_price_csv, load_price_csv, read_window_batch, read_windows, write_window_batch, write_windows
from qganfinance.data.pipeline import preprocess, return_windows
from qganfinance.errors import ConfigError, MissingFile, QganError
from qganfinance.experiments.fidelity import fidelity_sweep, summarize_fidelity, write_sweep
from qganfinance.logging_utils import get_logger, setup_logging
from qganfinance.metrics.report import write_report
from qganfinance.metrics.stylized_facts import stylized_fact_errors
from qganfinance.settings import settings
from qganfinance.training.checkpoint import latest_checkpoint
from qganfinance.training.runs import generate_from_checkpoint, run_meta, run_training
from qganfinance.training.sweep import STATEVECTOR_LABEL, train_sweep

logger = get_logger("cli")

Handler = Callable[[argparse.Namespace], None]


def utc_now_iso() -> str:
    """Return current UTC time as ISO-8601 string."""
    return datetime.now(timezone.utc).isoformat()


def _emit(payload: dict[str, object]) -> None:
    print(json.dumps(payload, sort_keys=True, default=str))  # noqa: T201


def parse_int_list(text: str) -> list[int]:
    """Parse `1,5,8` or `1-18` (inclusive) or a mix of both."""
    values: list[int] = []
    for part in text.split(","):
        token = part.strip()
        if not token:
            continue
        start, sep, stop = token.partition("-")
        try:
            values.extend(range(int(start), int(stop) + 1) if sep and start else [int(token)])
        except ValueError as exc:
            msg = f"not an integer list: {text!r}"
            raise ConfigError(msg) from exc
    if not values:
        msg = f"empty integer list: {text!r}"
        raise ConfigError(msg)
    return values


def parse_bond_list(text: str) -> list[int | None]:
    """Parse bond dimensions; `statevector` stands for the exact backend."""
    bonds: list[int | None] = []
    for part in text.split(","):
        token = part.strip()
        if token == STATEVECTOR_LABEL:
            bonds.append(None)
        elif token:
            bonds.extend(parse_int_list(token))
    return bonds


def _config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        msg = f"{args.command} requires --config"
        raise ConfigError(msg)
    return load_config(args.config).with_overrides(seed=args.seed, epochs=args.epochs, backend=args.backend, bond=args.bond)


# --- commands ---------------------------------------------------------------


def cmd_preprocess(args: argparse.Namespace) -> None:
    """Turn the configured price CSV into a window batch."""
    config = _config(args)
    prices = load_price_csv(config.prices_path)
    batch = preprocess(prices, config.pipeline_config())
    meta = run_meta(config, source=file_digest(config.prices_path))
    csv_path, meta_path = write_window_batch(batch, config.batch_path, meta)
    _emit(
        {
            "batch": str(csv_path),
            "metadata": str(meta_path),
            "windows": batch.num_windows,
            "window": batch.config.window,
            "min": float(batch.samples.min()),
            "max": float(batch.samples.max()),
            "in_range": bool(np.all(np.abs(batch.samples) <= 1.0)),
        },
    )


def cmd_train(args: argparse.Namespace) -> None:
    """Train, or continue training with --resume."""
    config = _config(args)
    run_dir, result = run_training(config, resume=args.resume)
    final = result.log.rows[-1] if len(result.log) else None
    _emit(
        {
            "run_dir": str(run_dir),
            "epochs": len(result.log),
            "EMD": final.EMD if final else None,
            "checkpoints": [str(p) for p in result.checkpoints],
        },
    )


def cmd_generate(args: argparse.Namespace) -> None:
    """Sample post-processed return windows from a checkpoint."""
    checkpoint = args.checkpoint
    if checkpoint is None:
        config = _config(args)
        checkpoint = latest_checkpoint(config.run_dir())
        if checkpoint is None:
            raise MissingFile(config.run_dir() / "checkpoints")
    seed = args.seed if args.seed is not None else 0
    samples = generate_from_checkpoint(checkpoint, args.count, seed)
    out = Path(args.out)
    write_windows(samples.returns, out, samples.meta)
    written = {"generated": str(out), "count": args.count}
    if args.raw:
        raw_path = out.with_name(f"{out.stem}.raw{out.suffix or '.csv'}")
        write_windows(samples.raw, raw_path, samples.meta)
        written["raw"] = str(raw_path)
    _emit(written)


def _reference_windows(path: Path, window: int, stride: int) -> np.ndarray:
    if is_price_csv(path):
        return return_windows(load_price_csv(path), window, stride)
    return read_windows(path)


def cmd_evaluate(args: argparse.Namespace) -> None:
    """Compare generated windows with reference windows or a price history."""
    generated = read_windows(Path(args.generated))
    if generated.shape[0] == 0:
        msg = f"{args.generated} holds no windows"
        raise ConfigError(msg)
    window = generated.shape[1]
    config = load_config(args.config) if args.config is not None else None
    stride = config.pipeline.stride if config is not None else 1
    reference = _reference_windows(Path(args.reference), window, stride)
    tau_max = args.tau_max
    if tau_max is None:
        tau_max = config.tau_max() if config is not None else max(1, window // 2)
    if not 1 <= tau_max < min(window, reference.shape[1]):
        msg = f"tau_max must lie in [1, window); got {tau_max} with window {window}"
        raise ConfigError(msg)
    report = stylized_fact_errors(reference, generated, tau_max)
    meta = provenance(
        config.config_hash() if config is not None else "",
        None,
        reference=file_digest(Path(args.reference)),
        generated=file_digest(Path(args.generated)),
    )
    qq_count = config.metrics.qq_points if config is not None else 99
    pdf_bins = config.metrics.pdf_bins if config is not None else 50
    paths = write_report(report, reference, generated, Path(args.out), meta, qq_count, pdf_bins)
    _emit({"EMD": report.emd, "E_ACF_id": report.e_acf_id, "E_ACF_abs": report.e_acf_abs, "E_Lev": report.e_lev, **{k: str(v) for k, v in paths.items()}})


def cmd_fidelity_sweep(args: argparse.Namespace) -> None:
    """Fidelity of MPS simulation against the dense state over depth, bond and seed."""
    config = _config(args)
    frame = fidelity_sweep(config.circuit_spec(), parse_int_list(args.depths), parse_int_list(args.bonds), parse_int_list(args.seeds))
    out = Path(args.out)
    meta = run_meta(config)
    write_sweep(frame, out, meta)
    summary = summarize_fidelity(frame)
    summary_path = write_json(summary, out.with_suffix(".summary.json"), meta)
    _emit(
        {
            "sweep": str(out),
            "summary": str(summary_path),
            "rows": summary["rows"],
            "monotonicity_violations": summary["monotonicity_violations"],
            "min_fidelity_at_largest_bond": summary["min_fidelity_at_largest_bond"],
        },
    )


def cmd_sweep(args: argparse.Namespace) -> None:
    """Train a (layers, bond, seed) grid and summarize the final metrics."""
    config = _config(args)
    config.check(for_training=True)
    batch = read_window_batch(config.batch_path)
    runs, summary = train_sweep(
        batch,
        config.circuit_spec(),
        config.critic_config(),
        config.train_config(),
        parse_int_list(args.layers),
        parse_bond_list(args.bonds),
        parse_int_list(args.seeds),
    )
    out = Path(args.out)
    meta = run_meta(config)
    write_csv(runs, out / "sweep_runs.csv", meta)
    write_csv(summary, out / "sweep_summary.csv", meta)
    _emit({"runs": str(out / "sweep_runs.csv"), "summary": str(out / "sweep_summary.csv"), "points": len(runs)})


# --- parser -----------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, *, config_required: bool = True) -> None:
    parser.add_argument("--config", type=Path, required=config_required, help="Run config JSON")
    parser.add_argument("--seed", type=int, default=None, help="Override the config seed")
    parser.add_argument("--epochs", type=int, default=None, help="Override train.epochs")
    parser.add_argument("--backend", choices=["statevector", "mps"], default=None, help="Override train.backend")
    parser.add_argument("--bond", type=int, default=None, help="Override train.max_bond")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one sub-command per operation."""
    parser = argparse.ArgumentParser(prog="qganfinance", description="Wasserstein quantum GAN for financial return series")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Logging level (default from QGAN_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("preprocess", help="Price CSV -> preprocessed window batch")
    _add_common(p)
    p.set_defaults(handler=cmd_preprocess)

    p = commands.add_parser("train", help="Train the generator and critic")
    _add_common(p)
    p.add_argument("--resume", action="store_true", help="Continue from the newest checkpoint")
    p.set_defaults(handler=cmd_train)

    p = commands.add_parser("generate", help="Sample return windows from a checkpoint")
    _add_common(p, config_required=False)
    p.add_argument("--checkpoint", type=Path, default=None, help="Checkpoint directory (default: newest of the config's run)")
    p.add_argument("--count", type=int, required=True, help="Number of windows")
    p.add_argument("--out", required=True, help="Output CSV")
    p.add_argument("--raw", action="store_true", help="Also write the raw expectation values")
    p.set_defaults(handler=cmd_generate)

    p = commands.add_parser("evaluate", help="Stylized-fact metrics of generated vs reference windows")
    p.add_argument("--reference", required=True, help="Price CSV or window CSV")
    p.add_argument("--generated", required=True, help="Window CSV")
    p.add_argument("--tau-max", type=int, default=None, help="Largest lag (default: window // 2)")
    p.add_argument("--config", type=Path, default=None, help="Run config for stride and report settings")
    p.add_argument("--out", required=True, help="Report directory")
    p.set_defaults(handler=cmd_evaluate)

    p = commands.add_parser("fidelity-sweep", help="MPS fidelity against the dense state")
    _add_common(p)
    p.add_argument("--depths", default="1-18", help="Layer counts, e.g. 1-18 or 1,4,8")
    p.add_argument("--bonds", default="1,8,16,24,32", help="Bond dimensions")
    p.add_argument("--seeds", default="0-4", help="Instance seeds")
    p.add_argument("--out", required=True, help="Output CSV")
    p.set_defaults(handler=cmd_fidelity_sweep)

    p = commands.add_parser("sweep", help="Train a layers x bond x seed grid")
    _add_common(p)
    p.add_argument("--layers", required=True, help="Layer counts, e.g. 1,5")
    p.add_argument("--bonds", default=STATEVECTOR_LABEL, help="Bond dimensions; 'statevector' for the exact backend")
    p.add_argument("--seeds", default="0", help="Training seeds")
    p.add_argument("--out", required=True, help="Output directory")
    p.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level or settings.log_level)
    try:
        settings.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)  # noqa: T201
        return ConfigError.exit_code
    handler: Handler = args.handler

    start_time = time.perf_counter()
    started_at = utc_now_iso()
    logger.info("[CMD START] name=%s started_at_utc=%s seed=%s", args.command, started_at, getattr(args, "seed", None))
    try:
        handler(args)
    except QganError as exc:
        duration_ms = round((time.perf_counter() - start_time) * 1000, 2)
        logger.exception(
            "[CMD ERROR] name=%s started_at_utc=%s ended_at_utc=%s duration_ms=%s exit_code=%d",
            args.command,
            started_at,
            utc_now_iso(),
            duration_ms,
            exc.exit_code,
        )
        print(f"error: {exc}", file=sys.stderr)  # noqa: T201
        return exc.exit_code

    duration_ms = round((time.perf_counter() - start_time) * 1000, 2)
    logger.info("[CMD END] name=%s started_at_utc=%s ended_at_utc=%s duration_ms=%s", args.command, started_at, utc_now_iso(), duration_ms)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
