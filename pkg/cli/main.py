"""relax-shock command line: parse flags, validate the run config, execute the selected stages."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from cli.commands import SUBCOMMANDS, RunContext, build_pipeline, enabled_stages
from config import settings
from core.errors import ConfigError
from memory.artifact_store import ArtifactStore
from reports.schemas import ExperimentConfig
from reports.summary import EmptyReportError, emit_report, summary_lines

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

DEFAULT_OUTPUT = Path("runs")


def load_config(path: Path | str, overrides: dict | None = None) -> ExperimentConfig:
    """Read and validate a JSON run config; raises ConfigError or pydantic ValidationError."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.model_validate(data)


def format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def run(subcommand: str, config: ExperimentConfig, *, tol_scale: float = 1.0, out: Path | None = None) -> int:
    """Execute one subcommand; prints one PASS/FAIL line per check and returns the exit status."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand '{subcommand}'")
    root = out or config.output_dir or DEFAULT_OUTPUT
    store = ArtifactStore(root)
    store.initialize()
    ctx = RunContext(config=config, store=store, tol_scale=tol_scale, seed=config.seed)
    pipeline = build_pipeline(ctx)
    selected = enabled_stages(config, subcommand)
    if not selected:
        logger.warning("All stages of '%s' are disabled by the experiment flags", subcommand)
        selected = ["setup"]
    result = pipeline.run({"config": config.model_dump(mode="json")}, selected)
    problems = {**result.failed, **{name: "prerequisite did not complete" for name in result.skipped}}

    if problems:
        store.store_json(
            "diagnostic.json",
            {
                "subcommand": subcommand,
                "completed": result.completed,
                "failed": result.failed,
                "skipped": result.skipped,
            },
        )
    try:
        ok = emit_report(ctx.checks, store, metrics=ctx.metrics, failed_stages=problems)
    except EmptyReportError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED
    for line in summary_lines(ctx.checks, problems):
        print(line)
    return EXIT_OK if ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relax-shock",
        description="Relaxation shock profiles, Evans-function stability and Green's-function checks",
    )
    parser.add_argument("subcommand", choices=sorted(SUBCOMMANDS), help="stage set to run")
    parser.add_argument("--config", required=True, type=Path, help="JSON run config")
    parser.add_argument("--out", type=Path, default=None, help="output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    parser.add_argument("--tol-scale", type=float, default=1.0, help="multiplier for acceptance tolerances")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    if args.tol_scale <= 0:
        print("error: --tol-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = load_config(args.config, {"seed": args.seed})
    except ValidationError as exc:
        print(f"config error: {format_validation_error(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out.expanduser().resolve() if args.out is not None else None
    return run(args.subcommand, config, tol_scale=args.tol_scale, out=out)


if __name__ == "__main__":
    sys.exit(main())
