import argparse

from kawlab.commands.common import add_run_arguments, execute


def handle(args: argparse.Namespace) -> int:
    return execute(args, kind="mms")


def register(subparsers) -> None:
    parser = subparsers.add_parser("mms", help="Verify convergence orders against a manufactured solution.")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)
