"""
Linear semigroup experiment: contraction of every step, exponential decay in
L2 and discrete H2, the energy identity and the smoothing constant.
"""

import logging
from pathlib import Path

import numpy as np

from kawlab.config import get_settings
from kawlab.core.energy import energy_rate_check, moment_identity_check
from kawlab.core.operator import spectral_abscissa
from kawlab.core.semigroup import (
    evolve_linear,
    fit_decay,
    random_initial_data,
    rough_initial_data,
    smoothing_constant,
    smoothing_ratio,
)
from kawlab.experiments.common import (
    fit_window,
    grid_of,
    operator_of,
    rng_of,
    save_trajectory,
    stepper_of,
)
from kawlab.schemas.config import RunConfig
from kawlab.schemas.report import ExperimentReport

logger = logging.getLogger(__name__)


def run_linear(cfg: RunConfig, report: ExperimentReport, out_dir: Path) -> None:
    grid = grid_of(cfg)
    op = operator_of(cfg, grid)
    stepper = stepper_of(cfg)
    alpha = cfg.grid.alpha
    tol = cfg.tolerances
    rng = rng_of(cfg)
    t_min, _ = fit_window(cfg, op)

    worst_growth = 0.0
    first = None
    for member in range(cfg.experiment.ensemble):
        u0 = random_initial_data(grid, rng)
        traj = evolve_linear(u0, op, stepper, cfg.horizons.t_final)
        norms = traj.norms("L2")
        worst_growth = max(worst_growth, float(np.max(np.diff(norms)) / norms[0]))
        if first is None:
            first = traj
    report.check("contraction", worst_growth <= tol.contraction, worst_growth, tol.contraction)

    fit = fit_decay(first, "L2", t_min=t_min)
    report.metrics["decay_fit"] = {"C": fit.C, "omega": fit.omega, "rmse": fit.rmse, "t_min": fit.t_min}
    report.check("decay_rate_positive", fit.omega > 0.0, fit.omega, 0.0)
    report.check("decay_fit_rmse", fit.rmse < tol.fit_rmse, fit.rmse, tol.fit_rmse)

    fit_h2 = fit_decay(first, "H2", t_min=t_min)
    report.metrics["decay_fit_h2"] = {"C": fit_h2.C, "omega": fit_h2.omega, "rmse": fit_h2.rmse}
    report.check("h2_decay_rate_positive", fit_h2.omega > 0.0, fit_h2.omega, 0.0)

    if grid.n <= get_settings().dense_limit:
        abscissa = spectral_abscissa(op)
        mismatch = abs(fit.omega + abscissa) / fit.omega if fit.omega > 0.0 else float("inf")
        report.metrics["spectral_abscissa"] = abscissa
        report.check("rate_matches_spectrum", mismatch < tol.abscissa, mismatch, tol.abscissa)

    rate = energy_rate_check(first, alpha)
    report.metrics["energy_rate"] = {"max_residual": rate.max_residual, "relative": rate.relative}
    report.check("energy_identity", rate.relative < tol.energy_rate, rate.relative, tol.energy_rate)
    moment = moment_identity_check(first, alpha)
    report.metrics["moment_identity_relative"] = moment.relative

    ratios = [smoothing_ratio(rough_initial_data(grid, rng), op, t, stepper) for t in cfg.horizons.smoothing_times]
    smoothing = smoothing_constant(ratios)
    report.check("smoothing_spread", smoothing.spread < tol.smoothing_spread, smoothing.spread, tol.smoothing_spread)
    report.metrics["smoothing"] = {
        "C": smoothing.C,
        "spread": smoothing.spread,
        "ratios": [{"t": r.t, "ratio": r.ratio, "shape": r.bound_shape} for r in ratios],
    }
    logger.info(
        "linear alpha=%.3g: omega=%.4g (H2 %.4g), smoothing spread %.3g",
        alpha, fit.omega, fit_h2.omega, smoothing.spread,
    )
    save_trajectory(cfg, report, first, out_dir, "linear")
