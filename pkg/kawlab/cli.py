"""
Command-line entry point: ``python -m kawlab.cli <command> ...``.

Exit codes: 0 every verdict passed, 1 a verdict failed, 2 configuration
error, 3 numerical failure.
"""

import argparse
import logging
import sys

from kawlab import __version__
from kawlab.commands import COMMANDS
from kawlab.config import get_settings
from kawlab.exceptions import KawlabError
from kawlab.logging_setup import configure_logging

logger = logging.getLogger("kawlab.cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kawlab",
        description="Numerical experiments for the boundary-damped Kawahara equation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="logging level (default from KAWLAB_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)
    try:
        return args.handler(args)
    except KawlabError as exc:
        logger.error("%s", exc)
        print(f"[ERROR] {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
