#!/usr/bin/env python3
"""
SUVR command-line interface

Subcommands: train, eval, ablate, export and trace. Logs go to stderr,
results to stdout and records to files under the output directory.
"""

import argparse
import logging
import os
import sys
from importlib.metadata import PackageNotFoundError
from importlib.metadata import version

from dotenv import load_dotenv

from suvr_engine.commands import register_commands
from suvr_engine.commands.common import common_parser
from suvr_engine.sentry_init import init_sentry

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

# Get package version
try:
    __version__ = version("suvr-engine")
except PackageNotFoundError:
    __version__ = "0.0.1"

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str | None = None) -> None:
    """Configure root logging from the flag, falling back to LOG_LEVEL."""
    name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    resolved = getattr(logging, name, None)
    if not isinstance(resolved, int):
        resolved = logging.INFO
    logging.basicConfig(level=resolved, format=LOG_FORMAT, stream=sys.stderr, force=True)
    if resolved is logging.INFO and level and name != "INFO":
        logger.warning(f"Unknown log level {level!r}, using INFO")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suvr",
        description="Search-based unsupervised visual representation learning",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    register_commands(subparsers, [common_parser()])
    return parser


def run(argv: list[str] | None = None) -> int:
    """
    Parse arguments and dispatch to a subcommand.

    Returns:
        int: 0 on success, 1 on runtime errors, 2 on usage errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    configure_logging(args.log_level)
    init_sentry()
    logger.debug(f"suvr {__version__}: {args.command}")
    return args.handler(args)


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
