"""Command line entry point: ``prola run|sweep|validate|presets``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from ..errors import ConfigError, ProlaError
from .config import BERNOULLI_PRESETS, SCHEDULE_PRESETS, read_config, shipped_configs
from .experiment import run_experiment
from .outputs import write_outputs, write_sweep_outputs

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3, 4

OUT_ENV_VAR = "PROLA_OUT_DIR"

log = logging.getLogger("prola")


class _UsageError(Exception):
    pass


def _parse_ks(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ks or any(k < 2 for k in ks):
        raise argparse.ArgumentTypeError(f"every K must be >= 2, got {text!r}")
    return ks


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prola",
        description="Play-and-random-observe bandit experiments (marked/unmarked officer assignment).",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True, help="YAML config path or shipped config name")
    run.add_argument("--seed", type=int, help="override base_seed")
    run.add_argument("--out", help=f"output directory (overrides ${OUT_ENV_VAR} and the config)")
    run.add_argument("--jobs", type=int, default=1, help="worker processes (does not change results)")

    sweep = sub.add_parser("sweep", help="run a config once per arm count K")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--k", required=True, type=_parse_ks, help="comma-separated K values, e.g. 10,20,30")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--out")
    sweep.add_argument("--jobs", type=int, default=1)

    presets = sub.add_parser("presets", help="list shipped configs and environment presets")
    presets.add_argument("action", choices=["list"])

    validate = sub.add_parser("validate", help="check a config and print it with defaults resolved")
    validate.add_argument("--config", required=True)
    return parser


def _load(ref: str, seed: int | None = None):
    try:
        config = read_config(ref)
    except FileNotFoundError as exc:
        raise _UsageError(str(exc)) from None
    if seed is not None:
        config = config.with_overrides(base_seed=seed)
    return config


def _out_dir(args, config) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV_VAR):
        return Path(os.environ[OUT_ENV_VAR])
    return Path(config.output_dir)


def _cmd_run(args) -> int:
    config = _load(args.config, args.seed)
    out = _out_dir(args, config)
    result = run_experiment(config, jobs=args.jobs)
    write_outputs(result, config, out)
    print(f"{config.name}: mean weak regret {result.mean_regret:.3f} "
          f"(sd {result.std_regret:.3f}, R={config.replications}) -> {out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = _load(args.config, args.seed)
    out = _out_dir(args, base)
    configs = {k: base.with_overrides(K=k) for k in args.k}
    results = {}
    for k, config in configs.items():
        results[k] = run_experiment(config, jobs=args.jobs)
        print(f"K={k}: mean weak regret {results[k].mean_regret:.3f} (sd {results[k].std_regret:.3f})")
    for k, result in results.items():
        write_outputs(result, configs[k], out / f"k{k}")
    write_sweep_outputs(results, out)
    print(f"sweep written to {out}")
    return EXIT_OK


def _cmd_presets(args) -> int:
    print("shipped configs:")
    for name, path in shipped_configs().items():
        first = path.read_text().splitlines()[0].lstrip("# ").strip()
        print(f"  {name:<20} {first}")
    print("bernoulli environment presets:")
    for name, desc in BERNOULLI_PRESETS.items():
        print(f"  {name:<20} {desc}")
    print("schedule environment presets:")
    for name, desc in SCHEDULE_PRESETS.items():
        print(f"  {name:<20} {desc}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = _load(args.config)
    sys.stdout.write(config.dump())
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "presets": _cmd_presets, "validate": _cmd_validate}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"prola: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"prola: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProlaError, OSError) as exc:
        print(f"prola: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(cli_main())
