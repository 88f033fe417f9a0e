import argparse
from pathlib import Path

from kawlab.trajectory_io import export_csv, read_trajectory


def handle(args: argparse.Namespace) -> int:
    """Convert a binary trajectory file into CSV next to it (or at ``--out``)."""
    source = Path(args.trajectory)
    target = Path(args.out) if args.out else source.with_suffix(".csv")
    traj = read_trajectory(source)
    export_csv(traj, target)
    print(f"[OK] {len(traj)} snapshots -> {target}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("export-csv", help="Export a trajectory file as CSV.")
    parser.add_argument("trajectory", help="binary trajectory file")
    parser.add_argument("--out", help="CSV path (default: trajectory path with .csv)")
    parser.set_defaults(handler=handle)
