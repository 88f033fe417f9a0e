import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from kawlab.core.forcing import ForcingSignal
from kawlab.core.mesh import Field, build_grid
from kawlab.core.nonlinear import (
    ManufacturedSolution,
    NonlinearRunConfig,
    convective_term,
    evolve_nonlinear,
    lifted_to_u,
    residual_mms,
    standard_manufactured,
    step_nonlinear,
    sup_norm_X,
)
from kawlab.core.semigroup import StepperConfig, random_initial_data, step_linear
from kawlab.exceptions import BlowUpError, NumericalError, ParameterError


def config(forcing=None, dt=1e-3, **kwargs):
    return NonlinearRunConfig(
        alpha=kwargs.pop("alpha", 0.5),
        forcing=forcing if forcing is not None else ForcingSignal.zero(),
        stepper=StepperConfig(dt=dt),
        **kwargs,
    )


def test_invalid_configurations():
    with pytest.raises(ParameterError):
        config(formulation="spectral")
    with pytest.raises(ParameterError):
        config(nonlinear_form="upwind")
    with pytest.raises(ParameterError):
        config(blowup_factor=1.0)
    with pytest.raises(ParameterError):
        convective_term(np.zeros(8), 0.0, 0.1, "upwind")


def test_skew_form_is_the_weighted_average(rng):
    u = rng.standard_normal(20)
    h = 1.0 / 21.0
    adv = convective_term(u, 0.3, h, "advective")
    cons = convective_term(u, 0.3, h, "conservative")
    np.testing.assert_allclose(convective_term(u, 0.3, h, "skew"), adv / 3.0 + 2.0 * cons / 3.0, atol=1e-12)


def test_skew_form_conserves_energy(rng):
    u = rng.standard_normal(30)
    term = convective_term(u, 0.0, 1.0 / 31.0, "skew")
    assert float(u @ term) == pytest.approx(0.0, abs=1e-10 * float(np.abs(u) @ np.abs(term)))


def test_zero_data_and_zero_forcing_stay_at_rest():
    grid = build_grid(16)
    traj = evolve_nonlinear(Field.zeros(grid), config(), (0.0, 0.1), stride=10)
    assert len(traj) == 11
    assert not np.any(traj.values)
    assert sup_norm_X(traj) == 0.0


def test_step_without_convection_is_the_linear_step(op32, smooth_field):
    got, _ = step_nonlinear(smooth_field, 0.0, config(convection=False), op32)
    expected = step_linear(smooth_field, op32, StepperConfig(dt=1e-3))
    np.testing.assert_allclose(got.values, expected.values, rtol=0, atol=1e-12)


def test_adams_bashforth_correction_is_quadratic(op32, smooth_field):
    def correction(scale):
        u = Field(smooth_field.grid, scale * smooth_field.values)
        history = -convective_term(u.values, 0.0, op32.h, "skew")
        full, _ = step_nonlinear(u, 0.0, config(), op32, history=history)
        linear, _ = step_nonlinear(u, 0.0, config(convection=False), op32, history=np.zeros(u.grid.n))
        return full.values - linear.values

    once, twice = correction(1.0), correction(2.0)
    assert np.max(np.abs(once)) > 0.0
    np.testing.assert_allclose(twice, 4.0 * once, rtol=1e-6, atol=1e-9 * np.max(np.abs(twice)))


def test_history_is_the_explicit_term(op32, smooth_field):
    _, explicit = step_nonlinear(smooth_field, 0.0, config(), op32)
    expected = -convective_term(smooth_field.values, 0.0, op32.h, "skew")
    np.testing.assert_allclose(explicit, expected, atol=1e-12)


def test_lifted_run_agrees_with_direct_run():
    grid = build_grid(32)
    forcing = ForcingSignal.periodic(1.0, [(1, 0.01, 0.0)])
    kwargs = dict(alpha=0.5, forcing=forcing, dt=2e-3, nonlinear_form="advective")
    direct = evolve_nonlinear(Field.zeros(grid), config(**kwargs), (0.0, 0.5), stride=25)
    lifted = evolve_nonlinear(
        Field.zeros(grid), config(formulation="lifted_y", **kwargs), (0.0, 0.5), stride=25
    )
    back = lifted_to_u(lifted, forcing, 0.5)
    np.testing.assert_allclose(back.left, direct.left, atol=1e-15)
    scale = np.max(np.abs(direct.values))
    assert scale > 0.0
    assert np.max(np.abs(back.values - direct.values)) < 0.05 * scale


def test_blow_up_is_reported(grid32):
    u0 = random_initial_data(grid32, np.random.default_rng(3))
    cfg = config(blowup_factor=2.0, source=lambda x, t: np.full_like(x, 1e6))
    with pytest.raises(BlowUpError):
        evolve_nonlinear(u0, cfg, (0.0, 0.01))


def test_evolve_rejects_bad_spans(grid32):
    with pytest.raises(ParameterError):
        evolve_nonlinear(Field.zeros(grid32), config(), (1.0, 0.0))
    with pytest.raises(ParameterError):
        evolve_nonlinear(Field.zeros(grid32), config(), (0.0, 0.1), stride=0)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.5, 0.9])
def test_standard_manufactured_meets_the_boundary_conditions(alpha):
    assert standard_manufactured(alpha).boundary_residual(alpha) < 1e-12


def test_manufactured_space_refinement_is_second_order():
    report = residual_mms(
        standard_manufactured(0.5), 0.5, refine="space", ns=(16, 32, 64), dts=(5e-4,), t_final=0.02
    )
    assert report.parameter == "space"
    assert report.errors[2] < report.errors[1] < report.errors[0]
    assert report.observed_order >= 1.8


@pytest.mark.parametrize("time_factor", ["cos", "exp", "sin"])
def test_manufactured_time_refinement_is_second_order(time_factor):
    report = residual_mms(
        standard_manufactured(0.5, time_factor=time_factor),
        0.5,
        refine="time",
        ns=(16,),
        dts=(0.02, 0.01, 0.005),
        t_final=0.2,
    )
    assert report.parameter == "time"
    assert report.steps == [0.02, 0.01, 0.005]
    assert report.errors[2] < report.errors[1] < report.errors[0]
    assert report.observed_order >= 1.8


def test_discrete_source_keeps_the_manufactured_solution_at_rest_in_the_scheme():
    grid = build_grid(16)
    manufactured = ManufacturedSolution(
        profile=standard_manufactured(0.5).profile,
        time_factor=lambda t: 1.0,
        time_derivative=lambda t: 0.0,
    )
    cfg = config(source=manufactured.discrete_source(grid, 0.5), dt=0.01)
    u0 = Field(grid, manufactured.value(grid.nodes, 0.0))
    traj = evolve_nonlinear(u0, cfg, (0.0, 0.1), stride=10)
    np.testing.assert_allclose(traj.values[-1], u0.values, rtol=0, atol=1e-9)


def test_mismatched_source_is_detected():
    with pytest.raises(NumericalError):
        residual_mms(
            standard_manufactured(0.5),
            0.5,
            ns=(16, 32),
            dts=(5e-4,),
            t_final=0.02,
            source=lambda x, t: np.full_like(x, 1e3),
        )


def test_profile_outside_the_domain_is_rejected():
    constant = ManufacturedSolution(
        profile=Polynomial([1.0]),
        time_factor=lambda t: 1.0,
        time_derivative=lambda t: 0.0,
    )
    with pytest.raises(ParameterError):
        residual_mms(constant, 0.5)


def test_refine_mode_is_validated():
    with pytest.raises(ParameterError):
        residual_mms(standard_manufactured(0.5), 0.5, refine="both", ns=(16,), t_final=0.01)


def test_manufactured_value_uses_the_time_factor():
    m = standard_manufactured(0.0)
    x = np.linspace(0.0, 1.0, 5)
    np.testing.assert_allclose(m.value(x, 1.0), -m.profile(x), atol=1e-15)
    assert m.value(0.5, 0.5) == pytest.approx(math.cos(math.pi * 0.5) * m.profile(0.5), abs=1e-15)


@pytest.mark.parametrize(
    "time_factor, t, value",
    [("cos", 1.0, -1.0), ("exp", 1.0, math.exp(-1.0)), ("sin", 0.25, 1.0)],
)
def test_time_factor_options(time_factor, t, value):
    m = standard_manufactured(0.0, time_factor=time_factor)
    assert m.time_factor(t) == pytest.approx(value)
    step = 1e-6
    slope = (m.time_factor(t + step) - m.time_factor(t - step)) / (2.0 * step)
    assert m.time_derivative(t) == pytest.approx(slope, rel=1e-6, abs=1e-6)
    with pytest.raises(ParameterError):
        standard_manufactured(0.0, time_factor="tanh")
