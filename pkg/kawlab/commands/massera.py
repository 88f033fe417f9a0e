import argparse

from kawlab.commands.common import add_run_arguments, execute

SUB_KINDS = {
    "periodic": "massera_periodic",
    "quasi": "massera_quasi",
    "almost": "massera_almost",
}


def handle(args: argparse.Namespace) -> int:
    return execute(args, kind=SUB_KINDS[args.kind])


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "massera", help="Check that the forced solution inherits the recurrence of the forcing."
    )
    add_run_arguments(parser)
    parser.add_argument("--kind", choices=sorted(SUB_KINDS), required=True, help="forcing recurrence to test")
    parser.set_defaults(handler=handle)
