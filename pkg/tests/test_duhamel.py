import math

import numpy as np
import pytest

from kawlab.core.duhamel import (
    DuhamelWindow,
    ball_radius,
    fixed_point_solve,
    mild_solution_residual,
    psi_apply,
    truncation_horizon,
)
from kawlab.core.forcing import ForcingSignal
from kawlab.core.mesh import build_grid
from kawlab.core.nonlinear import NonlinearRunConfig
from kawlab.core.semigroup import DecayFit, StepperConfig, Trajectory
from kawlab.exceptions import CoverageError, NonContractionError, ParameterError


def fit(C=1.0, omega=1.0):
    return DecayFit(C=C, omega=omega, rmse=0.0, norm_kind="L2", t_min=0.0, points=10, slack=0.0)


def lifted_config(amplitude=0.01):
    forcing = ForcingSignal.periodic(1.0, [(1, amplitude, 0.0)]) if amplitude else ForcingSignal.zero()
    return NonlinearRunConfig(
        alpha=0.5, forcing=forcing, stepper=StepperConfig(dt=1e-3), formulation="lifted_y"
    )


def test_truncation_horizon():
    assert truncation_horizon(fit(), math.exp(-10.0), 1.0) == pytest.approx(10.0)
    assert truncation_horizon(fit(), 1e-6, 0.0) == 0.0
    assert truncation_horizon(fit(), 10.0, 1.0) == 0.0
    with pytest.raises(ParameterError):
        truncation_horizon(fit(omega=0.0), 1e-6, 1.0)
    with pytest.raises(ParameterError):
        truncation_horizon(fit(), 0.0, 1.0)


def test_ball_radius():
    assert ball_radius(fit(C=2.0), 0.5) == pytest.approx(3.0)
    with pytest.raises(ParameterError):
        ball_radius(fit(omega=-1.0), 0.5)


@pytest.mark.parametrize("t_lo, t_hi, t_cut", [(1.0, 1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, -0.1)])
def test_window_validation(t_lo, t_hi, t_cut):
    with pytest.raises(ParameterError):
        DuhamelWindow(t_lo, t_hi, t_cut)


def test_window_start():
    assert DuhamelWindow(0.5, 1.0, 2.0).start == pytest.approx(-1.5)


def test_zero_forcing_is_a_fixed_point_at_once():
    y, report = fixed_point_solve(lifted_config(0.0), build_grid(16), DuhamelWindow(0.0, 0.1, 0.1), tol=1e-12)
    assert report.iterations == 1
    assert report.factors == []
    assert report.final_residual == 0.0
    assert not np.any(y.values)


@pytest.fixture(scope="module")
def small_fixed_point():
    cfg = lifted_config()
    window = DuhamelWindow(0.0, 0.2, 0.2)
    y, report = fixed_point_solve(cfg, build_grid(16), window, tol=1e-10, fit=fit(C=1.0, omega=5.0))
    return cfg, y, report


def test_small_forcing_contracts(small_fixed_point):
    _, y, report = small_fixed_point
    assert report.converged
    assert report.iterations > 1
    assert all(f < 1.0 for f in report.factors)
    assert report.final_residual < 1e-8
    assert report.sup_norm > 0.0
    assert report.rho is not None and report.rho > 0.0
    assert y.t0 == pytest.approx(-0.2)
    assert y.t_end == pytest.approx(0.2)


def test_fixed_point_is_a_mild_solution(small_fixed_point):
    cfg, y, _ = small_fixed_point
    assert mild_solution_residual(y, cfg, 0.05, 0.15) < 1e-7
    with pytest.raises(ParameterError):
        mild_solution_residual(y, cfg, 0.15, 0.05)


def test_psi_of_the_fixed_point_returns_it(small_fixed_point):
    cfg, y, _ = small_fixed_point
    image = psi_apply(y, cfg, DuhamelWindow(0.0, 0.2, 0.2))
    assert np.max(np.abs(image.values - y.values)) < 1e-6 * np.max(np.abs(y.values))


def test_history_must_be_sampled_at_every_step():
    grid = build_grid(16)
    coarse = Trajectory(grid=grid, t0=0.0, dt=1e-2, values=np.zeros((11, grid.n)))
    with pytest.raises(CoverageError):
        psi_apply(coarse, lifted_config(), DuhamelWindow(0.05, 0.1, 0.0))


def test_iteration_budget_is_enforced():
    with pytest.raises(NonContractionError):
        fixed_point_solve(lifted_config(), build_grid(16), DuhamelWindow(0.0, 0.1, 0.1), tol=1e-30, max_iter=2)
