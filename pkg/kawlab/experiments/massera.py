"""
Recurrence experiments for periodic, quasi-periodic and almost-periodic
boundary forcing.

Every verdict compares a residual with a tolerance expressed relative to the
size of the solution or to the time-discretization error, measured by
repeating a run with half the step.
"""

import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from kawlab.core.forcing import CoefficientFields, ForcingSignal, c1_norm, lifting_map
from kawlab.core.mesh import Grid, sobolev_norms
from kawlab.core.nonlinear import NonlinearRunConfig, evolve_nonlinear
from kawlab.core.recurrence import (
    RecurrenceRun,
    bohr_scan,
    claim2_period_check,
    hull_sampler,
    orbit_collapse_check,
    periodicity_residual,
    quasi_claim1_check,
    scan_soundness,
    transient_horizon,
    translation_bound_check,
)
from kawlab.core.semigroup import StepperConfig, random_initial_data
from kawlab.exceptions import CoverageError
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

DEFAULT_LEAD = 1.0


def scheme_tolerance(run: RecurrenceRun, forcing: ForcingSignal, t_end: float) -> float:
    """Largest L2 gap between the run and the same run with half the step."""
    dt = run.cfg.stepper.dt
    fine = replace(
        run,
        cfg=replace(run.cfg, stepper=StepperConfig(dt=dt / 2.0, theta=run.cfg.stepper.theta)),
        stride=2 * run.stride,
    )
    coarse_traj = run.evolve(forcing, t_end)
    fine_traj = fine.evolve(forcing, t_end)
    h = coarse_traj.grid.h
    gaps = sobolev_norms(coarse_traj.values - fine_traj.values, h, 0, coarse_traj.left - fine_traj.left)
    return float(np.max(gaps))


def _lead_time(fit, tol: float, scale: float, dt: float) -> float:
    return round_up(max(transient_horizon(fit, tol, scale), DEFAULT_LEAD), dt)


def run_periodic(cfg: RunConfig, report: ExperimentReport, out_dir: Path) -> None:
    grid = grid_of(cfg)
    op = operator_of(cfg, grid)
    forcing = forcing_of(cfg)
    run = nonlinear_config(cfg, forcing)
    T = cfg.horizons.period
    t_final = cfg.horizons.t_final
    tol = cfg.tolerances.periodicity
    stride = cfg.horizons.stride

    u0 = initial_field(cfg, grid, rng_of(cfg), forcing)
    traj = evolve_nonlinear(u0, run, (0.0, t_final), stride=stride)
    scale = float(np.max(traj.norms("L2")))
    fit = semigroup_fit(cfg, grid, op)

    other = random_initial_data(grid, rng_of(cfg, stream=1)) * max(c1_norm(forcing), 1e-3)
    spread = float(sobolev_norms((other - u0).values[None, :], grid.h, 0)[0])
    if cfg.horizons.window is not None:
        window = cfg.horizons.window
        horizon = window[0]
    else:
        horizon = transient_horizon(fit, tol * scale, max(spread, scale))
        window = (round_up(horizon, traj.dt), t_final - T)
    if window[1] <= window[0]:
        raise CoverageError(
            f"t_final={t_final} leaves no periodicity window after the transient ({horizon:.4g})",
            stage="massera",
        )

    result = periodicity_residual(traj, T, window, "L2", tolerance=tol * scale, horizon=horizon)
    report.metrics["solution_scale"] = scale
    report.metrics["transient_horizon"] = horizon
    report.metrics["window"] = list(window)
    report.metrics["headline_residual"] = result.headline
    report.metrics["interpolated"] = result.interpolated
    report.check("periodicity", result.passed, result.headline, result.tolerance)

    second = evolve_nonlinear(other, run, (0.0, t_final), stride=stride)
    collapse = orbit_collapse_check(traj, second, window)
    report.metrics["orbit_collapse"] = collapse
    report.check("orbit_collapse", collapse < tol * scale, collapse, tol * scale)
    logger.info("periodic: headline %.3e (scale %.3e), collapse %.3e", result.headline, scale, collapse)
    save_trajectory(cfg, report, traj, out_dir, "massera_periodic")


def _recurrence_run(cfg: RunConfig, grid: Grid, run: NonlinearRunConfig, fit, forcing) -> RecurrenceRun:
    epsilon = max(c1_norm(forcing), 1e-300)
    lead = _lead_time(fit, cfg.tolerances.periodicity * epsilon, epsilon, run.stepper.dt)
    return RecurrenceRun(cfg=run, grid=grid, t_start=-lead, stride=cfg.horizons.stride)


def run_quasi(cfg: RunConfig, report: ExperimentReport, out_dir: Path) -> None:
    grid = grid_of(cfg)
    op = operator_of(cfg, grid)
    forcing = forcing_of(cfg)
    run = nonlinear_config(cfg, forcing)
    fit = semigroup_fit(cfg, grid, op)
    recurrence = _recurrence_run(cfg, grid, run, fit, forcing)
    window = cfg.horizons.window or (0.0, 2.0)
    h = round_up(cfg.horizons.shift, run.stepper.dt * recurrence.stride)
    factor = cfg.tolerances.recurrence_factor

    scheme_tol = scheme_tolerance(recurrence, forcing, window[1])
    threshold = factor * scheme_tol
    report.metrics["lead_time"] = -recurrence.t_start
    report.metrics["scheme_tolerance"] = scheme_tol

    claim1 = quasi_claim1_check(forcing, h, recurrence, window)
    report.metrics["claim1"] = {"h": h, "discrepancy": claim1}
    report.check("phase_flow_identity", claim1 <= threshold, claim1, threshold)

    sampler = hull_sampler(forcing, recurrence)
    phases = forcing.spec["phases"]
    claim2 = [claim2_period_check(sampler, i, phases) for i in range(1, sampler.dimension + 1)]
    report.metrics["claim2"] = claim2
    for i, residual in enumerate(claim2, start=1):
        report.check(f"torus_period[{i}]", residual <= threshold, residual, threshold)

    base = recurrence.evolve(forcing, window[1]).window(*window)
    logger.info("quasi: claim1 %.3e, claim2 %s, scheme tol %.3e", claim1, claim2, scheme_tol)
    save_trajectory(cfg, report, base, out_dir, "massera_quasi")


def _pick(taus: np.ndarray, count: int) -> np.ndarray:
    if len(taus) <= count:
        return taus
    index = np.linspace(0, len(taus) - 1, count).round().astype(int)
    return taus[np.unique(index)]


def run_almost(cfg: RunConfig, report: ExperimentReport, out_dir: Path) -> None:
    grid = grid_of(cfg)
    op = operator_of(cfg, grid)
    forcing = forcing_of(cfg)
    run = nonlinear_config(cfg, forcing, formulation="lifted_y")
    epsilon = c1_norm(forcing)
    horizons = cfg.horizons
    fit = semigroup_fit(cfg, grid, op)

    delta = cfg.tolerances.translation_delta * epsilon
    scan = bohr_scan(forcing, delta, horizons.scan_length, horizons.scan_resolution)
    sound = scan_soundness(forcing, scan, window=horizons.scan_length)
    report.metrics["scan"] = {
        "delta": delta,
        "length": scan.length,
        "resolution": scan.resolution,
        "found": int(len(scan.taus)),
        "max_gap": scan.max_gap,
    }
    report.check("scan_soundness", sound)
    report.check("translation_numbers_found", len(scan.taus) >= horizons.translation_samples, len(scan.taus))

    taus = _pick(scan.taus, horizons.translation_samples)
    window = horizons.window or (0.0, 5.0)
    recurrence = _recurrence_run(cfg, grid, run, fit, forcing)
    t_end = window[1] + (float(taus.max()) if len(taus) else 0.0)
    y = recurrence.evolve(forcing, round_up(t_end, run.stepper.dt * recurrence.stride))
    coeffs = CoefficientFields(lifting_map(cfg.grid.alpha), forcing, cfg.experiment.alternate_f)

    rows = []
    for tau in taus:
        part = y.window(window[0], window[1] + float(tau))
        bound = translation_bound_check(
            part, coeffs, float(tau), fit, calibration=cfg.tolerances.calibration
        )
        rows.append({"tau": float(tau), "lhs": bound.lhs, "rhs": bound.rhs, "satisfied": bound.satisfied})
    report.metrics["translation_bound"] = {"calibration": cfg.tolerances.calibration, "samples": rows}
    report.check(
        "translation_bound",
        bool(rows) and all(row["satisfied"] for row in rows),
        max((row["lhs"] / row["rhs"] for row in rows if row["rhs"] > 0.0), default=math.nan),
        cfg.tolerances.calibration,
    )
    logger.info("almost periodic: %d translation numbers, %d checked", len(scan.taus), len(rows))
    save_trajectory(cfg, report, y.window(*window), out_dir, "massera_almost")
