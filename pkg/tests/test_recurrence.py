import math

import numpy as np
import pytest

from kawlab.core.forcing import CoefficientFields, ForcingSignal, lifting_map
from kawlab.core.mesh import build_grid
from kawlab.core.nonlinear import NonlinearRunConfig
from kawlab.core.recurrence import (
    HullSampler,
    RecurrenceRun,
    TranslationScan,
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
from kawlab.core.semigroup import DecayFit, StepperConfig, Trajectory, random_initial_data
from kawlab.exceptions import CoverageError, ParameterError

SQRT2 = math.sqrt(2.0)


def fit(C=1.0, omega=1.0):
    return DecayFit(C=C, omega=omega, rmse=0.0, norm_kind="L2", t_min=0.0, points=10, slack=0.0)


def _separable(grid, profile, t_final=2.0, dt=0.01):
    v = random_initial_data(grid, np.random.default_rng(5)).values
    times = dt * np.arange(int(round(t_final / dt)) + 1)
    return Trajectory(grid=grid, t0=0.0, dt=dt, values=profile(times)[:, None] * v[None, :])


def _quasi():
    return ForcingSignal.quasi([1.0, SQRT2], [0.0, 0.0], [([1, 0], 0.005, 0.0), ([0, 1], 0.005, 0.0)])


def _run(t_start, n=8):
    cfg = NonlinearRunConfig(alpha=0.5, forcing=_quasi(), stepper=StepperConfig(dt=1e-3, theta=1.0))
    return RecurrenceRun(cfg=cfg, grid=build_grid(n), t_start=t_start)


def test_periodicity_of_a_decaying_orbit(grid32):
    decaying = _separable(grid32, lambda t: np.exp(-t))
    report = periodicity_residual(decaying, 1.0, (0.0, 1.0), tolerance=1e-6)
    assert report.headline == pytest.approx(1.0 - math.exp(-1.0), rel=1e-9)
    assert not report.passed
    assert not report.interpolated


def test_periodicity_of_a_periodic_orbit(grid32):
    traj = _separable(grid32, lambda t: np.sin(2.0 * math.pi * t))
    report = periodicity_residual(traj, 1.0, (0.0, 1.0), tolerance=1e-6)
    assert report.headline < 1e-12
    assert report.passed
    assert len(report.times) == 101


def test_off_grid_period_is_interpolated(grid32):
    traj = _separable(grid32, lambda t: np.sin(2.0 * math.pi * t))
    report = periodicity_residual(traj, 1.005, (0.0, 0.9))
    assert report.interpolated
    assert report.headline == pytest.approx(2.0 * math.sin(math.pi * 0.005), rel=1e-2)


def test_periodicity_needs_coverage(grid32):
    traj = _separable(grid32, np.cos)
    with pytest.raises(CoverageError):
        periodicity_residual(traj, 1.0, (0.0, 1.5))
    with pytest.raises(ParameterError):
        periodicity_residual(traj, 0.0, (0.0, 1.0))
    with pytest.raises(ParameterError):
        periodicity_residual(traj, 1.0, (0.0, 1.0), norm_kind="H1")


def test_transient_horizon():
    assert transient_horizon(fit(), math.exp(-10.0)) == pytest.approx(10.0)
    assert transient_horizon(fit(), 1e-3, scale=1e-4) == 0.0
    with pytest.raises(ParameterError):
        transient_horizon(fit(omega=0.0), 1e-3)


def test_identical_orbits_collapse(grid32):
    traj = _separable(grid32, np.cos)
    assert orbit_collapse_check(traj, traj, (0.5, 1.5)) == 0.0
    with pytest.raises(ParameterError):
        orbit_collapse_check(traj, _separable(build_grid(16), np.cos), (0.5, 1.5))


def test_bohr_scan_of_a_sine():
    signal = ForcingSignal.periodic(1.0, [(1, 1.0, 0.0)])
    scan = bohr_scan(signal, 0.1, 3.0, 0.01)
    expected = [0.01, 0.99, 1.0, 1.01, 1.99, 2.0, 2.01, 2.99, 3.0]
    np.testing.assert_allclose(scan.taus, expected, atol=1e-12)
    assert scan.max_gap == pytest.approx(0.98)
    assert not scan.sampled
    assert scan_soundness(signal, scan, 2.0)


def test_scan_of_zero_forcing_accepts_every_shift():
    scan = bohr_scan(ForcingSignal.zero(), 0.1, 1.0, 0.01)
    assert len(scan.taus) == 100
    assert scan.max_gap == pytest.approx(0.01)


def test_scan_of_sampled_data():
    times = 0.01 * np.arange(400)
    scan = bohr_scan((times, np.sin(2.0 * math.pi * times)), 0.1, 1.5, 0.01)
    assert scan.sampled
    assert np.any(np.isclose(scan.taus, 1.0))
    assert not np.any(np.isclose(scan.taus, 0.5))
    with pytest.raises(ParameterError):
        bohr_scan((times, np.sin(times)), 0.1, 1.5, 0.015)


def test_scan_validation_and_empty_gap():
    with pytest.raises(ParameterError):
        bohr_scan(ForcingSignal.zero(), 0.0, 1.0, 0.01)
    with pytest.raises(ParameterError):
        bohr_scan(ForcingSignal.zero(), 0.1, 1.0, 0.0)
    assert TranslationScan(0.1, np.array([]), 1.0, 0.01).max_gap == math.inf


def test_hull_sampler_requirements():
    with pytest.raises(ParameterError):
        HullSampler(ForcingSignal.periodic(1.0, [(1, 0.01, 0.0)]), _run(-0.05))
    with pytest.raises(ParameterError):
        hull_sampler(_quasi(), _run(0.0))


@pytest.mark.parametrize("direction", [0, 3])
def test_claim2_direction_is_validated(direction):
    sampler = hull_sampler(_quasi(), _run(-0.05))
    with pytest.raises(ParameterError):
        claim2_period_check(sampler, direction)


def test_full_turn_on_the_torus_gives_the_same_hull_point():
    sampler = hull_sampler(_quasi(), _run(-0.05))
    assert sampler.dimension == 2
    assert claim2_period_check(sampler, 1) < 1e-10
    assert claim2_period_check(sampler, 2, phases=[0.3, 0.1]) < 1e-10


def test_claim1_requirements():
    with pytest.raises(ParameterError):
        quasi_claim1_check(ForcingSignal.zero(), 0.1, _run(0.0), (0.0, 0.1))
    with pytest.raises(CoverageError):
        quasi_claim1_check(_quasi(), 0.1, _run(0.0), (-0.1, 0.1))


def test_translation_bound_on_a_rest_state(grid32):
    rest = _separable(grid32, np.ones_like, t_final=1.0)
    coeffs = CoefficientFields(lifting_map(0.5), ForcingSignal.zero())
    bound = translation_bound_check(rest, coeffs, 0.25, fit())
    assert bound.lhs == 0.0
    assert bound.rhs == 0.0
    assert bound.satisfied
    with pytest.raises(CoverageError):
        translation_bound_check(rest, coeffs, 1.0, fit())
    with pytest.raises(ParameterError):
        translation_bound_check(rest, coeffs, -0.1, fit())


def test_claim1_gap_closes_as_the_transient_decays():
    run = _run(0.0)
    early = quasi_claim1_check(_quasi(), 0.05, run, (0.0, 0.02))
    late = quasi_claim1_check(_quasi(), 0.05, run, (3.0, 3.5))
    assert early > 0.0
    assert late < 0.1 * early


def test_translation_bound_on_a_forced_run():
    signal = ForcingSignal.periodic(1.0, [(1, 0.01, 0.0)])
    cfg = NonlinearRunConfig(
        alpha=0.5, forcing=signal, stepper=StepperConfig(dt=1e-3, theta=0.5), formulation="lifted_y"
    )
    y = RecurrenceRun(cfg=cfg, grid=build_grid(16), t_start=0.0, stride=10).evolve(signal, 2.0)
    coeffs = CoefficientFields(lifting_map(0.5), signal)
    bound = translation_bound_check(y, coeffs, 0.25, fit(), t_lo=0.5)
    assert bound.lhs > 0.0
    assert bound.rhs > 0.0
    assert bound.satisfied
    assert bound.sigma == 0.25
