import math

import numpy as np
import pytest

from kawlab.core.mesh import Field, build_grid, sobolev_norms
from kawlab.core.operator import build_operator, spectral_abscissa
from kawlab.core.semigroup import (
    SmoothingRatio,
    StepperConfig,
    Trajectory,
    dense_propagator,
    evolve_linear,
    fit_decay,
    random_initial_data,
    rough_initial_data,
    smoothing_bound_shape,
    smoothing_constant,
    smoothing_ratio,
    step_count,
    step_linear,
)
from kawlab.exceptions import CoverageError, NumericalError, ParameterError


@pytest.mark.parametrize("dt, theta", [(0.0, 0.5), (-1e-3, 0.5), (1e-3, 0.4), (1e-3, 1.1)])
def test_stepper_config_validation(dt, theta):
    with pytest.raises(ParameterError):
        StepperConfig(dt=dt, theta=theta)


def test_step_count_needs_a_multiple_of_dt():
    assert step_count(0.05, 1e-3) == 50
    with pytest.raises(ParameterError):
        step_count(0.0105, 1e-3)


@pytest.mark.parametrize("theta", [0.5, 0.75, 1.0])
def test_step_matches_dense_theta_scheme(theta, op32, smooth_field):
    dt = 1e-3
    dense = op32.to_dense()
    eye = np.eye(op32.n)
    expected = np.linalg.solve(eye - theta * dt * dense, (eye + (1.0 - theta) * dt * dense) @ smooth_field.values)
    got = step_linear(smooth_field, op32, StepperConfig(dt=dt, theta=theta)).values
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-8 * np.max(np.abs(expected)))


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.9])
def test_crank_nicolson_contracts_every_step(alpha, grid32):
    op = build_operator(grid32, alpha)
    rng = np.random.default_rng(7)
    for _ in range(5):
        u0 = random_initial_data(grid32, rng)
        traj = evolve_linear(u0, op, StepperConfig(dt=1e-3, theta=0.5), 0.2)
        norms = traj.norms("L2")
        assert np.all(np.diff(norms) <= 1e-12 * norms[0])


def test_dense_propagator_is_a_contraction(op32, smooth_field):
    assert np.allclose(dense_propagator(op32, 0.0), np.eye(op32.n))
    h = op32.h
    moved = dense_propagator(op32, 0.3) @ smooth_field.values
    assert math.sqrt(h * moved @ moved) <= math.sqrt(h * smooth_field.values @ smooth_field.values) + 1e-10
    with pytest.raises(ParameterError):
        dense_propagator(op32, -1.0)


def test_random_initial_data_is_reproducible_and_normalized(grid32):
    a = random_initial_data(grid32, np.random.default_rng(1))
    b = random_initial_data(grid32, np.random.default_rng(1))
    np.testing.assert_array_equal(a.values, b.values)
    assert sobolev_norms(a.values[None, :], grid32.h, 0)[0] == pytest.approx(1.0)


def _exponential(grid, rate, t_final=3.0, dt=0.01, C=1.0):
    u = random_initial_data(grid, np.random.default_rng(0)).values
    times = np.arange(0.0, t_final + dt / 2, dt)
    values = C * np.exp(-rate * times)[:, None] * u[None, :]
    values[0] = u
    return Trajectory(grid=grid, t0=0.0, dt=dt, values=values)


def test_fit_decay_recovers_a_pure_exponential(grid32):
    fit = fit_decay(_exponential(grid32, 2.0, C=1.5), "L2", t_min=0.5)
    assert fit.omega == pytest.approx(2.0, rel=1e-9)
    assert fit.C == pytest.approx(1.5, rel=1e-9)
    assert fit.rmse < 1e-9


def test_fit_decay_rejects_degenerate_inputs(grid32):
    zero = Trajectory(grid=grid32, t0=0.0, dt=0.1, values=np.zeros((20, grid32.n)))
    with pytest.raises(NumericalError):
        fit_decay(zero)
    with pytest.raises(NumericalError):
        fit_decay(_exponential(grid32, 1.0, t_final=0.55, dt=0.01), t_min=0.5)


def test_trajectory_window_and_lookup(grid32):
    traj = _exponential(grid32, 1.0)
    part = traj.window(1.0, 2.0)
    assert part.t0 == pytest.approx(1.0)
    assert len(part) == 101
    assert traj.index_of(0.5) == 50
    with pytest.raises(CoverageError):
        traj.index_of(0.505)
    with pytest.raises(CoverageError):
        traj.window(-1.0, 1.0)


def test_interpolation_reproduces_snapshots(grid32):
    traj = _exponential(grid32, 1.0)
    np.testing.assert_allclose(traj.interpolate(traj.times[10]), traj.values[10], atol=1e-14)


def test_smoothing_shape_and_constant():
    assert smoothing_bound_shape(1.0, 0.0) == pytest.approx(math.sqrt(2.0))
    ratios = [SmoothingRatio(t=0.1, ratio=2.0, bound_shape=4.0), SmoothingRatio(t=1.0, ratio=1.0, bound_shape=1.0)]
    result = smoothing_constant(ratios)
    assert result.C == pytest.approx(1.0)
    assert result.spread == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        smoothing_constant([])


def test_smoothing_ratio_is_positive(op32, smooth_field):
    ratio = smoothing_ratio(smooth_field, op32, 0.05, StepperConfig(dt=1e-3))
    assert ratio.ratio > 0.0
    assert ratio.bound_shape == pytest.approx(smoothing_bound_shape(0.05, 0.5))
    with pytest.raises(ParameterError):
        smoothing_ratio(Field.zeros(op32.grid), op32, 0.05, StepperConfig(dt=1e-3))


def test_step_rejects_mismatched_grid(op32):
    with pytest.raises(ParameterError):
        step_linear(Field.zeros(build_grid(16)), op32, StepperConfig(dt=1e-3))


def test_rough_initial_data_is_white_noise(grid32):
    a = rough_initial_data(grid32, np.random.default_rng(2))
    b = rough_initial_data(grid32, np.random.default_rng(2))
    np.testing.assert_array_equal(a.values, b.values)
    assert sobolev_norms(a.values[None, :], grid32.h, 0)[0] == pytest.approx(1.0)
    smooth = random_initial_data(grid32, np.random.default_rng(2))
    assert sobolev_norms(a.values[None, :], grid32.h, 2)[0] > 10.0 * sobolev_norms(smooth.values[None, :], grid32.h, 2)[0]


def _slowest_mode(op):
    eigenvalues, vectors = np.linalg.eig(op.to_dense())
    k = int(np.argmin(np.abs(eigenvalues)))
    v = vectors[:, k]
    v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    u = np.real(v)
    return eigenvalues[k], Field(op.grid, u / math.sqrt(op.h * float(u @ u)))


@pytest.mark.parametrize("theta, order, coarse_error", [(0.5, 1.8, 0.05), (1.0, 0.8, 0.5)])
def test_theta_scheme_converges_to_the_dense_propagator(op32, theta, order, coarse_error):
    lam, u0 = _slowest_mode(op32)
    dt = 0.1 / abs(lam)
    t_final = 40 * dt
    exact = dense_propagator(op32, t_final) @ u0.values
    errors = []
    for step in (dt, dt / 2.0):
        traj = evolve_linear(u0, op32, StepperConfig(dt=step, theta=theta), t_final)
        errors.append(math.sqrt(op32.h * float((traj.values[-1] - exact) @ (traj.values[-1] - exact))))
    assert errors[0] < coarse_error
    assert math.log2(errors[0] / errors[1]) >= order


def test_dense_propagator_semigroup_law():
    op = build_operator(build_grid(16), 0.5)
    whole = dense_propagator(op, 0.3)
    split = dense_propagator(op, 0.1) @ dense_propagator(op, 0.2)
    np.testing.assert_allclose(split, whole, rtol=0, atol=1e-7)
    swapped = dense_propagator(op, 0.2) @ dense_propagator(op, 0.1)
    np.testing.assert_allclose(swapped, whole, rtol=0, atol=1e-7)


def test_fitted_rate_matches_the_spectral_abscissa(op32, smooth_field):
    abscissa = spectral_abscissa(op32)
    assert abscissa < 0.0
    horizon = 20.0 / abs(abscissa)
    dt = horizon / 4000
    traj = evolve_linear(smooth_field, op32, StepperConfig(dt=dt), 4000 * dt, stride=10)
    fit = fit_decay(traj, "L2", t_min=0.5 * traj.t_end)
    assert fit.omega == pytest.approx(-abscissa, rel=0.1)
