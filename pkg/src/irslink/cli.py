"""Command-line interface.

Subcommands: `run <config.json>`, `preset <name>`, `list-presets`, and
`oracle <config.json>`.  Exit codes: 0 success, 2 configuration error,
3 memory guard refusal, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .coupling import MemoryLimitError
from .experiments import (ExperimentConfig, load_experiment_config, oracle_check,
                          presets, resolve_preset, run_experiment, write_csv,
                          write_solver_reports)
from .geometry import GeometryError
from .spectrum import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MEMORY = 3
EXIT_RUNTIME = 4


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None, help="output CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--mem-cap-gb", type=float, default=None,
                   help="dense coupling matrix memory cap in GiB")
    p.add_argument("--plot", action="store_true",
                   help="also render a PNG figure next to the CSV")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irslink",
        description="Wideband IRS link simulator: sweeps, phase solvers, bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config file")
    p_run.add_argument("config", type=Path)
    _add_run_flags(p_run)

    p_preset = sub.add_parser("preset", help="run a named preset")
    p_preset.add_argument("name")
    p_preset.add_argument("--scale", choices=("desk", "paper"), default="desk")
    _add_run_flags(p_preset)

    sub.add_parser("list-presets", help="list available presets")

    p_oracle = sub.add_parser("oracle",
                              help="exhaustive quantized check of a small config")
    p_oracle.add_argument("config", type=Path)
    p_oracle.add_argument("--levels", type=int, default=8,
                          help="phase quantization levels")
    p_oracle.add_argument("--out", type=Path, default=None,
                          help="write the JSON rows to this file")
    return parser


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "mem_cap_gb", None) is not None:
        updates["mem_cap_gb"] = args.mem_cap_gb
    return dataclasses.replace(config, **updates) if updates else config


def _default_out(config: ExperimentConfig) -> Path:
    return Path(f"{config.name}.csv")


def _run(config: ExperimentConfig, args) -> int:
    config = _apply_overrides(config, args)
    rows = run_experiment(config, threads=max(1, args.threads))
    out = args.out if args.out is not None else _default_out(config)
    write_csv(rows, out)
    write_solver_reports(rows, out.with_suffix(".solvers.jsonl"))
    print(f"wrote {out} ({len(rows)} rows)", file=sys.stderr)
    if args.plot:
        from .report import render_figure
        fig_path = out.with_suffix(".png")
        render_figure(rows, fig_path, title=config.name)
        print(f"wrote {fig_path}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name, cfg in sorted(presets().items()):
                print(f"{name:18s} {cfg.description}")
            return EXIT_OK
        if args.command == "run":
            return _run(load_experiment_config(args.config), args)
        if args.command == "preset":
            return _run(resolve_preset(args.name, args.scale), args)
        if args.command == "oracle":
            entries = oracle_check(load_experiment_config(args.config),
                                   phase_levels=args.levels)
            lines = [json.dumps(e, sort_keys=True) for e in entries]
            if args.out is not None:
                args.out.write_text("\n".join(lines) + "\n")
            for line in lines:
                print(line)
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, GeometryError, FileNotFoundError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemoryLimitError as exc:
        print(f"memory guard: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    except Exception as exc:  # runtime failures get their own exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
