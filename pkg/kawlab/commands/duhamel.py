import argparse

from kawlab.commands.common import add_run_arguments, execute


def handle(args: argparse.Namespace) -> int:
    return execute(args, kind="duhamel")


def register(subparsers) -> None:
    parser = subparsers.add_parser("duhamel", help="Solve the truncated Duhamel fixed point by Picard iteration.")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)
