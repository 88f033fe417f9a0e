"""
Forced runs: the bounded-solution experiment and the Duhamel fixed point.
"""

import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from kawlab.core.duhamel import DuhamelWindow, fixed_point_solve, mild_solution_residual, truncation_horizon
from kawlab.core.forcing import CoefficientFields, c1_norm, coefficient_norms, lifting_map
from kawlab.core.mesh import Field, sobolev_norms
from kawlab.core.nonlinear import evolve_nonlinear, sup_norm_X
from kawlab.core.semigroup import StepperConfig
from kawlab.experiments.common import (
    forcing_of,
    grid_of,
    initial_field,
    nonlinear_config,
    operator_of,
    rng_of,
    round_up,
    save_trajectory,
    semigroup_fit,
)
from kawlab.schemas.config import RunConfig
from kawlab.schemas.report import ExperimentReport

logger = logging.getLogger(__name__)


def run_bounded(cfg: RunConfig, report: ExperimentReport, out_dir: Path) -> None:
    grid = grid_of(cfg)
    forcing = forcing_of(cfg)
    run = nonlinear_config(cfg, forcing)
    u0 = initial_field(cfg, grid, rng_of(cfg), forcing)
    traj = evolve_nonlinear(u0, run, (0.0, cfg.horizons.t_final), stride=cfg.horizons.stride)

    epsilon = c1_norm(forcing)
    sup_norm = sup_norm_X(traj)
    ratio = sup_norm / epsilon if epsilon > 0.0 else None
    report.metrics["c1_norm"] = epsilon
    report.metrics["epsilon"] = epsilon
    report.metrics["sup_norm"] = sup_norm
    report.metrics["sup_norm_over_epsilon"] = ratio
    report.metrics["final_norm"] = float(traj.norms("H2")[-1])
    report.check("bounded", math.isfinite(sup_norm), sup_norm)
    if ratio is not None:
        limit = cfg.tolerances.bounded_ratio
        report.check("sup_norm_over_epsilon", ratio <= limit, ratio, limit)
    logger.info("bounded run: eps=%.3g sup|u|_X=%.4g", epsilon, sup_norm)
    save_trajectory(cfg, report, traj, out_dir, "nonlinear")


def _attractor_distance(y_values: np.ndarray, other: np.ndarray, h: float) -> float:
    return float(np.max(sobolev_norms(y_values - other, h, 2)))


def run_duhamel(cfg: RunConfig, report: ExperimentReport, out_dir: Path) -> None:
    grid = grid_of(cfg)
    op = operator_of(cfg, grid)
    forcing = forcing_of(cfg)
    run = nonlinear_config(cfg, forcing, formulation="lifted_y")
    dt = run.stepper.dt
    tol = cfg.tolerances

    fit = semigroup_fit(cfg, grid, op)
    epsilon = c1_norm(forcing)
    coeffs = CoefficientFields(lifting_map(cfg.grid.alpha), forcing, cfg.experiment.alternate_f)
    t_lo, t_hi = cfg.horizons.window or (0.0, forcing.period or 1.0)
    samples = np.arange(t_lo, t_hi + dt, dt)
    f_norm = coefficient_norms(coeffs, samples).f
    scale = max(epsilon, 1e-300)
    picard_tol = tol.picard * scale
    if cfg.horizons.t_cut is not None:
        t_cut = cfg.horizons.t_cut
    else:
        t_cut = truncation_horizon(fit, picard_tol, f_norm)
    window = DuhamelWindow(t_lo=t_lo, t_hi=t_hi, t_cut=round_up(t_cut, dt))

    y, fp = fixed_point_solve(run, grid, window, tol=picard_tol, fit=fit)
    report.metrics["picard"] = {
        "iterations": fp.iterations,
        "factors": fp.factors,
        "final_residual": fp.final_residual,
        "sup_norm": fp.sup_norm,
        "t_cut": fp.t_cut,
        "rho": fp.rho,
    }
    report.metrics["semigroup_fit"] = {"C": fit.C, "omega": fit.omega}
    report.check(
        "contraction_factors",
        all(f < 1.0 for f in fp.factors),
        max(fp.factors, default=0.0),
        1.0,
    )
    report.check("picard_residual", fp.final_residual < picard_tol, fp.final_residual, picard_tol)

    # The IMEX run from rest at the same start reaches the same bounded solution.
    start = Field.zeros(grid)
    span = (window.start, window.t_hi)
    coarse = evolve_nonlinear(start, run, span).window(t_lo, t_hi)
    fine_run = replace(run, stepper=StepperConfig(dt=dt / 2.0, theta=run.stepper.theta))
    fine = evolve_nonlinear(start, fine_run, span, stride=2).window(t_lo, t_hi)
    scheme_tol = _attractor_distance(coarse.values, fine.values, grid.h)
    mismatch = _attractor_distance(y.window(t_lo, t_hi).values, coarse.values, grid.h)
    threshold = tol.recurrence_factor * max(scheme_tol, picard_tol)
    report.metrics["scheme_tolerance"] = scheme_tol
    report.metrics["attractor_mismatch"] = mismatch
    report.check("matches_attractor", mismatch <= threshold, mismatch, threshold)

    mild = mild_solution_residual(y, run, t_lo, t_hi)
    report.metrics["mild_residual"] = mild
    logger.info(
        "duhamel: %d iterations, residual %.3e, attractor mismatch %.3e (scheme tol %.3e)",
        fp.iterations, fp.final_residual, mismatch, scheme_tol,
    )
    save_trajectory(cfg, report, y, out_dir, "duhamel")
