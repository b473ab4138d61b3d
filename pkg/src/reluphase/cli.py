"""Command-line entry point.

Usage:
    reluphase <command> --out DIR [--config FILE.json] [--seed N] [--runs N] [--threads N]

Commands: train, sweep-width, sweep-angle, norm-hist, gc-prob, trace-dynamics,
landscape-audit.  The config file is a flat JSON object whose keys must match
the chosen command; unknown keys are an error so typos cannot silently fall
back to defaults.  --seed, --runs, and --threads override the corresponding
config keys when the command has them.
"""
from __future__ import annotations

import argparse
import json
import sys

from .experiments import COMMANDS, ConfigError, run_command


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            loaded = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {path!r} must contain a JSON object")
    return loaded


def _apply_overrides(command: str, mapping: dict, args: argparse.Namespace) -> dict:
    spec = COMMANDS[command][1]
    out = dict(mapping)
    if args.seed is not None:
        key = "seed" if "seed" in spec else "seed_base" if "seed_base" in spec else None
        if key is None:
            raise ConfigError(f"command {command!r} takes no seed")
        out[key] = args.seed
    if args.runs is not None:
        if "runs" not in spec:
            raise ConfigError(f"command {command!r} takes no run count")
        out["runs"] = args.runs
    if args.threads is not None:
        if "threads" not in spec:
            raise ConfigError(f"command {command!r} takes no thread count")
        out["threads"] = args.threads
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reluphase",
        description="deterministic experiments on two-layer hinge-loss subgradient descent",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--runs", type=int, default=None, help="override the run count")
        p.add_argument("--threads", type=int, default=None, help="worker processes for sweeps")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        mapping = _apply_overrides(args.command, _load_config(args.config), args)
        summary = run_command(args.command, mapping, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for key, value in summary.items():
        print(f"{key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
