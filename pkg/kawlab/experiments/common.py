"""
Shared plumbing for experiment modules: building core objects from a
validated :class:`RunConfig`, the decay fit that sizes transients, and
trajectory output.
"""

from __future__ import annotations

import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from kawlab.config import get_settings
from kawlab.core.forcing import ForcingSignal, c1_norm
from kawlab.core.mesh import Field, Grid, build_grid
from kawlab.core.nonlinear import NonlinearRunConfig
from kawlab.core.operator import DiscreteOperator, build_operator, spectral_abscissa
from kawlab.core.semigroup import (
    DecayFit,
    StepperConfig,
    Trajectory,
    evolve_linear,
    fit_decay,
    random_initial_data,
)
from kawlab.exceptions import NumericalError
from kawlab.schemas.config import RunConfig
from kawlab.schemas.report import ExperimentReport
from kawlab.trajectory_io import export_csv, write_trajectory

logger = logging.getLogger(__name__)

# Fit window in units of 1/omega when the spectrum is available.
FIT_START = 3.0
FIT_END = 20.0


def grid_of(cfg: RunConfig) -> Grid:
    return build_grid(cfg.grid.n)


def operator_of(cfg: RunConfig, grid: Grid) -> DiscreteOperator:
    return build_operator(grid, cfg.grid.alpha)


def stepper_of(cfg: RunConfig) -> StepperConfig:
    return StepperConfig(dt=cfg.stepper.dt, theta=cfg.stepper.theta)


def forcing_of(cfg: RunConfig) -> ForcingSignal:
    return cfg.forcing.to_signal()


def nonlinear_config(cfg: RunConfig, forcing: ForcingSignal | None = None, **changes) -> NonlinearRunConfig:
    run = NonlinearRunConfig(
        alpha=cfg.grid.alpha,
        forcing=forcing_of(cfg) if forcing is None else forcing,
        stepper=stepper_of(cfg),
        formulation=cfg.experiment.formulation,
        nonlinear_form=cfg.experiment.nonlinear_form,
        alternate_f=cfg.experiment.alternate_f,
        epsilon_budget=cfg.forcing.epsilon_budget,
    )
    return replace(run, **changes) if changes else run


def rng_of(cfg: RunConfig, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible streams derived from the configured seed."""
    return np.random.default_rng([cfg.experiment.seed, stream])


def initial_field(cfg: RunConfig, grid: Grid, rng: np.random.Generator, forcing: ForcingSignal) -> Field:
    """Zero, or random smooth data of size ``initial_amplitude`` (relative to epsilon when forced)."""
    if cfg.experiment.initial == "zero":
        return Field.zeros(grid)
    size = c1_norm(forcing) or 1.0
    return random_initial_data(grid, rng) * (cfg.experiment.initial_amplitude * size)


def round_up(t: float, dt: float) -> float:
    """Smallest multiple of ``dt`` that is at least ``t``."""
    return math.ceil(t / dt - 1e-9) * dt


def fit_window(cfg: RunConfig, op: DiscreteOperator) -> tuple[float, float]:
    """``(t_min, span)`` of the linear decay fit."""
    if cfg.horizons.t_min is not None:
        return cfg.horizons.t_min, cfg.horizons.t_final
    if op.n > get_settings().dense_limit:
        return 0.5, cfg.horizons.t_final
    omega = -spectral_abscissa(op)
    if not omega > 0.0:
        raise NumericalError(f"spectral abscissa {-omega:.3e} is not negative", stage="decay_fit")
    return FIT_START / omega, FIT_END / omega


def semigroup_fit(cfg: RunConfig, grid: Grid, op: DiscreteOperator) -> DecayFit:
    """Decay constants ``(C, omega)`` from one random linear run."""
    stepper = stepper_of(cfg)
    t_min, span = fit_window(cfg, op)
    u0 = random_initial_data(grid, rng_of(cfg, stream=99))
    traj = evolve_linear(u0, op, stepper, round_up(span, stepper.dt))
    fit = fit_decay(traj, "L2", t_min=t_min)
    logger.info("semigroup fit: C=%.4g omega=%.4g rmse=%.3g", fit.C, fit.omega, fit.rmse)
    return fit


def save_trajectory(
    cfg: RunConfig, report: ExperimentReport, traj: Trajectory, out_dir: Path, name: str
) -> None:
    traj.meta["seed"] = cfg.experiment.seed
    if cfg.output.trajectory:
        path = write_trajectory(traj, out_dir / f"{name}.traj")
        report.files[name] = str(path)
    if cfg.output.csv:
        path = export_csv(traj, out_dir / f"{name}.csv")
        report.files[f"{name}_csv"] = str(path)
