"""Command-line entry point: ``cavitywalk <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, NumericalGuardError
from .experiments import PRESETS, config_from_mapping, read_config_file, run

SUBCOMMANDS = {
    "walk": "ideal-walk",
    "noisy-walk": "noisy-walk",
    "afd": "afd",
    "synth-check": "synth-check",
    "baseline": "classical-baseline",
    "sweep": "sweep",
    "preset": "preset",
}

# flag name -> config key; values stay strings and are parsed by the config layer
FLAGS = {
    "--coin": "coin",
    "--init": "init",
    "--theta": "theta",
    "--delta": "delta",
    "--steps": "steps",
    "--walker": "walker",
    "--fock-dim": "fock_dim",
    "--kappa": "kappa",
    "--gamma": "gamma",
    "--dt": "dt",
    "--fit-window": "fit_window",
    "--grid": "grid",
    "--initial-cavity": "initial_cavity",
    "--mean-photons": "mean_photons",
    "--coin-duration": "coin_duration",
    "--n-bar": "n_bar",
    "--photon-number": "photon_number",
    "--name": "name",
    "--jobs": "jobs",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavitywalk", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        if name == "preset":
            p.add_argument("preset", choices=PRESETS)
        p.add_argument("--config", help="key=value config file ([run] section plus per-mode sections)")
        p.add_argument("--out", default=".", help="output directory")
        for flag, key in FLAGS.items():
            p.add_argument(flag, dest=key, default=None, help="comma-separated list for sweeps" if key in ("coin", "init", "kappa", "gamma") else None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        values = read_config_file(args.config) if args.config else {}
        values["mode"] = SUBCOMMANDS[args.command]
        if args.command == "preset":
            values["preset"] = args.preset
        for key in FLAGS.values():
            val = getattr(args, key)
            if val is not None:
                values[key] = val
        config = config_from_mapping(values)
        status, outcome = run(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalGuardError as exc:
        print(f"numerical guard tripped: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if outcome is not None and outcome.text:
        print(outcome.text)
    if status == 2:
        print("numerical guard tripped; see flags in the output", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
