"""
Experiment dispatch: run the configured kind, persist the report and record
the run in the ledger.
"""

import logging
from pathlib import Path

from kawlab.config import get_settings
from kawlab.exceptions import EXIT_OK, EXIT_VERDICT_FAILED, KawlabError
from kawlab.experiments.forced import run_bounded, run_duhamel
from kawlab.experiments.ledger import record_run
from kawlab.experiments.linear import run_linear
from kawlab.experiments.massera import run_almost, run_periodic, run_quasi
from kawlab.experiments.mms import run_mms
from kawlab.experiments.observability import run_observability
from kawlab.experiments.sweep import run_sweep
from kawlab.schemas.config import RunConfig
from kawlab.schemas.report import ExperimentReport

logger = logging.getLogger(__name__)

EXPERIMENTS = {
    "linear": run_linear,
    "nonlinear": run_bounded,
    "duhamel": run_duhamel,
    "massera_periodic": run_periodic,
    "massera_quasi": run_quasi,
    "massera_almost": run_almost,
    "observability": run_observability,
    "mms": run_mms,
    "sweep": run_sweep,
}


def output_dir_for(cfg: RunConfig) -> Path:
    root = cfg.output.dir or get_settings().output_dir
    return Path(root) / f"{cfg.kind}-seed{cfg.experiment.seed}"


def run_experiment(
    cfg: RunConfig,
    *,
    out_dir: Path | None = None,
    record: bool | None = None,
    workers: int | None = None,
) -> ExperimentReport:
    """Execute ``cfg`` and return its report (also written as ``report.yaml``).

    Errors raised by any stage end up in the report with the stage named; the
    report's ``exit_code`` follows the CLI convention.
    """
    out_dir = Path(out_dir) if out_dir is not None else output_dir_for(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = ExperimentReport(kind=cfg.kind, seed=cfg.experiment.seed, config=cfg.echo())
    logger.info("starting %s experiment (seed %d) -> %s", cfg.kind, cfg.experiment.seed, out_dir)

    experiment = EXPERIMENTS[cfg.kind]
    try:
        if cfg.kind == "sweep":
            experiment(cfg, report, out_dir, workers=workers)
        else:
            experiment(cfg, report, out_dir)
    except KawlabError as exc:
        report.status = "error"
        report.stage = exc.stage or cfg.kind
        report.error = str(exc)
        report.exit_code = exc.exit_code
        logger.error("%s experiment failed in stage %s: %s", cfg.kind, report.stage, exc)
    else:
        report.exit_code = EXIT_OK if report.passed else EXIT_VERDICT_FAILED
        for verdict in report.verdicts:
            if not verdict.passed:
                logger.warning("verdict %s failed (value=%s, threshold=%s)", verdict.name, verdict.value, verdict.threshold)

    path = out_dir / "report.yaml"
    report.files["report"] = str(path)
    report.write(path)
    logger.info("%s finished: %s (exit %d)", cfg.kind, "pass" if report.passed else "fail", report.exit_code)

    if record if record is not None else get_settings().record_runs:
        record_run(report)
    return report
