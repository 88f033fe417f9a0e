"""
Best-effort recording of finished runs in the SQL ledger.
"""

import logging

from sqlalchemy.exc import SQLAlchemyError

from kawlab.database import get_db, init_db
from kawlab.models import ExperimentRun, SweepCell
from kawlab.schemas.report import ExperimentReport

logger = logging.getLogger(__name__)

HEADLINE_KEYS = (
    "decay_fit",
    "gamma",
    "nu",
    "sup_norm",
    "headline_residual",
    "picard",
    "claim1",
    "claim2",
    "scan",
)


def headline_metrics(report: ExperimentReport) -> dict:
    data = report.to_dict()["metrics"]
    return {key: data[key] for key in HEADLINE_KEYS if key in data}


def record_run(report: ExperimentReport, database_url: str | None = None):
    """Store the run (and its sweep cells); returns the row id or None.

    Ledger failures are logged and never change the verdict of the run.
    """
    try:
        init_db(database_url)
        with get_db(database_url) as db:
            run = ExperimentRun(
                kind=report.kind,
                config=report.to_dict()["config"],
                seed=report.seed,
                verdict="pass" if report.passed else ("error" if report.status != "ok" else "fail"),
                exit_code=report.exit_code,
                metrics=headline_metrics(report),
                report_path=report.files.get("report"),
            )
            for row in report.children:
                run.cells.append(
                    SweepCell(
                        cell_index=row["index"],
                        parameters=row["parameters"],
                        status=row["status"],
                        metrics=row.get("metrics"),
                        error=row.get("error"),
                    )
                )
            db.add(run)
            db.commit()
            db.refresh(run)
            logger.info("recorded run %s in the ledger", run.id)
            return run.id
    except SQLAlchemyError as exc:
        logger.warning("could not record run in the ledger: %s", exc)
        return None
