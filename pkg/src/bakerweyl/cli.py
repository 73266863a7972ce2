"""Command line entry point: ``bakerweyl <command> --config FILE [--out DIR] [--jobs N]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ExperimentConfig
from .errors import ConfigError
from .experiments import COMMANDS

EXIT_OK, EXIT_TASK_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bakerweyl",
        description="Spectra of open quantum baker's maps and discrete fractal uncertainty checks.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="key = value experiment file")
    parser.add_argument("--out", help="output directory (overrides 'output' in the config)")
    parser.add_argument("--jobs", type=int, help="worker threads (default: config, else one per core)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.from_file(args.config)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output
    code = COMMANDS[args.command](cfg, out, args.jobs)
    if code:
        print(f"some tasks failed; see {out}/manifest.json", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
