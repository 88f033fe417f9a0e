"""
Manufactured-solution verification of the forced solver.
"""

import logging
from pathlib import Path

from kawlab.core.nonlinear import residual_mms, standard_manufactured
from kawlab.schemas.config import RunConfig
from kawlab.schemas.report import ExperimentReport

logger = logging.getLogger(__name__)


def run_mms(cfg: RunConfig, report: ExperimentReport, out_dir: Path) -> None:
    mms = cfg.mms
    manufactured = standard_manufactured(cfg.grid.alpha, nonlinear=mms.nonlinear, time_factor=mms.time_factor)
    common = {
        "t_final": mms.t_final,
        "theta": cfg.stepper.theta,
        "nonlinear_form": cfg.experiment.nonlinear_form,
    }
    studies = []
    if mms.refine in ("space", "both"):
        studies.append(
            residual_mms(
                manufactured, cfg.grid.alpha, refine="space",
                ns=tuple(mms.ns), dts=(min(mms.dts),), **common,
            )
        )
    if mms.refine in ("time", "both"):
        studies.append(
            residual_mms(
                manufactured, cfg.grid.alpha, refine="time",
                ns=(mms.ns[0],), dts=tuple(sorted(mms.dts, reverse=True)), **common,
            )
        )

    threshold = cfg.tolerances.mms_order
    for study in studies:
        report.metrics[f"{study.parameter}_refinement"] = {
            "steps": study.steps,
            "errors": study.errors,
            "orders": study.orders,
        }
        order = study.observed_order
        report.check(
            f"{study.parameter}_order",
            order is not None and order >= threshold,
            order,
            threshold,
        )
    report.metrics["manufactured"] = manufactured.name
