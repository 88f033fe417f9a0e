import argparse

from kawlab.commands.common import add_run_arguments, execute


def handle(args: argparse.Namespace) -> int:
    return execute(args, allowed=("linear", "nonlinear"))


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="Run a linear or nonlinear simulation and its checks.")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle)
