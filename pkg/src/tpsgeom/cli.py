"""Command-line entry point: ``tpsgeom verify ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .errors import ConfigError
from .report import SUITES, SuiteConfig, run_suite, serialize_report

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

_KEYS = ("suite", "n", "points", "seed", "tol_closed", "tol_fd", "models", "format", "workers")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tpsgeom", description="Numerical verification of the phase-space geometry.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="run verification suites and write a report")
    v.add_argument("--suite", choices=SUITES + ("all",))
    v.add_argument("--n", type=int, nargs="+", help="dimension parameters (default 1 2 3)")
    v.add_argument("--points", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol-closed", dest="tol_closed", type=float)
    v.add_argument("--tol-fd", dest="tol_fd", type=float)
    v.add_argument("--model", dest="models", action="append", help="built-in model name; repeatable")
    v.add_argument("--format", choices=("json", "text"))
    v.add_argument("--out", type=Path, help="output path (default stdout)")
    v.add_argument("--config", type=Path, help="YAML file with the same keys; flags override it")
    v.add_argument("--workers", type=int, help="worker processes (default: TPSGEOM_WORKERS or CPU count)")
    return parser


def load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    if "model" in data:
        data["models"] = data.pop("model")
    unknown = set(data) - set(_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    merged = load_config(args.config)
    for key in _KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    for key in ("n", "models"):
        if key in merged:
            v = merged[key]
            merged[key] = tuple(v) if isinstance(v, (list, tuple)) else (v,)
    try:
        return SuiteConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"tpsgeom: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(cfg)
    data = serialize_report(report, cfg.format)
    if args.out is None:
        sys.stdout.buffer.write(data)
    else:
        args.out.write_bytes(data)
    return EXIT_OK if report.all_passed else EXIT_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
