import argparse

from kawlab.commands.common import add_run_arguments, execute


def handle(args: argparse.Namespace) -> int:
    return execute(args, kind="linear")


def register(subparsers) -> None:
    parser = subparsers.add_parser("decay-fit", help="Fit the exponential decay of the linear semigroup.")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)
