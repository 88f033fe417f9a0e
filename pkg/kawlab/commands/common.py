"""
Arguments and execution shared by the experiment sub-commands.
"""

import argparse
import logging

from kawlab.exceptions import ConfigError
from kawlab.experiments import run_experiment
from kawlab.schemas.config import load_config
from kawlab.schemas.report import ExperimentReport

logger = logging.getLogger(__name__)


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="YAML run configuration")
    parser.add_argument("--seed", type=int, help="override experiment.seed")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    parser.add_argument("--workers", type=int, help="worker processes for sweeps")
    parser.add_argument("--no-record", action="store_true", help="skip the run ledger")


def print_summary(report: ExperimentReport) -> None:
    for verdict in report.verdicts:
        tag = "[OK]  " if verdict.passed else "[FAIL]"
        value = "" if verdict.value is None else f" value={verdict.value:.6g}"
        threshold = "" if verdict.threshold is None else f" threshold={verdict.threshold:.6g}"
        print(f"{tag} {verdict.name}{value}{threshold}")
    if report.status != "ok":
        print(f"[ERROR] stage {report.stage}: {report.error}")
    print(f"report: {report.files.get('report')}")


def execute(args: argparse.Namespace, kind: str | None = None, allowed: tuple[str, ...] = ()) -> int:
    """Load the configuration with overrides, run it and return the exit code."""
    overrides = list(args.overrides)
    if kind is not None:
        overrides.append(f"experiment.kind={kind}")
    if args.seed is not None:
        overrides.append(f"experiment.seed={args.seed}")
    if args.out is not None:
        overrides.append(f"output.dir={args.out}")
    cfg = load_config(args.config, overrides)
    if allowed and cfg.kind not in allowed:
        raise ConfigError(f"expected one of {', '.join(allowed)}, got {cfg.kind}", key="experiment.kind")
    report = run_experiment(
        cfg,
        record=False if args.no_record else None,
        workers=args.workers,
    )
    print_summary(report)
    return report.exit_code
