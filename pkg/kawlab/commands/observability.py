import argparse

from kawlab.commands.common import add_run_arguments, execute


def handle(args: argparse.Namespace) -> int:
    return execute(args, kind="observability")


def register(subparsers) -> None:
    parser = subparsers.add_parser("observability", help="Check the energy inequalities and the decay constants they imply.")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)
