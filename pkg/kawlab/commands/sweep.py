import argparse

from kawlab.commands.common import add_run_arguments, execute


def handle(args: argparse.Namespace) -> int:
    return execute(args, kind="sweep")


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="Run a parameter sweep.")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)
