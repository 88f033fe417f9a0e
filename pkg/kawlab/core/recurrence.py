"""
Recurrence diagnostics for forced runs: periodicity residuals, torus phase
checks for quasi-periodic forcing, translation-number scans and the
translation bound for almost-periodic forcing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from kawlab.core.forcing import CoefficientFields, ForcingSignal, shift_norms
from kawlab.core.mesh import Field, Grid, sobolev_norms
from kawlab.core.nonlinear import NonlinearRunConfig, evolve_nonlinear
from kawlab.core.semigroup import DecayFit, Trajectory
from kawlab.exceptions import CoverageError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_CALIBRATION = 50.0


def _norm_order(norm_kind: str | int) -> int:
    if norm_kind in ("L2", 0):
        return 0
    if norm_kind in ("H2", 2):
        return 2
    raise ParameterError(f"norm kind must be L2 or H2, got {norm_kind!r}")


def _on_grid(traj: Trajectory, t: float) -> bool:
    j = round((t - traj.t0) / traj.dt)
    return abs(traj.t0 + j * traj.dt - t) <= 1e-9 * max(1.0, abs(t))


def _sample(traj: Trajectory, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Snapshot rows (and left values) at ``times``; cubic in time off the grid."""
    if all(_on_grid(traj, t) for t in times):
        idx = np.array([traj.index_of(float(t)) for t in times], dtype=int)
        return traj.values[idx], traj.left[idx]
    values = traj.interpolate(times)
    left = CubicSpline(traj.times, traj.left)(times)
    return values, left


def _distance(traj_a, times_a, traj_b, times_b, k: int) -> np.ndarray:
    va, la = _sample(traj_a, times_a)
    vb, lb = _sample(traj_b, times_b)
    return sobolev_norms(va - vb, traj_a.grid.h, k, la - lb, 0.0)


# ----------------------------------------------------------------------
# Periodicity
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MasseraReport:
    kind: str
    times: np.ndarray
    residuals: np.ndarray
    horizon: float = 0.0
    tolerance: float = 0.0
    interpolated: bool = False

    @property
    def headline(self) -> float:
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0

    @property
    def passed(self) -> bool:
        return self.headline < self.tolerance


def periodicity_residual(
    traj: Trajectory,
    T: float,
    window: tuple[float, float],
    norm_kind: str | int = "L2",
    tolerance: float = 0.0,
    horizon: float = 0.0,
) -> MasseraReport:
    """``|u(t + T) - u(t)|`` for the snapshot times t in ``window``."""
    if not T > 0.0:
        raise ParameterError(f"period must be positive, got {T}")
    t_lo, t_hi = window
    if t_lo < traj.t0 - 1e-9 or t_hi + T > traj.t_end + 1e-9:
        raise CoverageError(
            f"trajectory [{traj.t0}, {traj.t_end}] does not cover [{t_lo}, {t_hi} + {T}]",
            stage="recurrence",
        )
    times = traj.window(t_lo, t_hi).times
    k = _norm_order(norm_kind)
    residuals = _distance(traj, times + T, traj, times, k)
    return MasseraReport(
        kind="periodic",
        times=times,
        residuals=residuals,
        horizon=horizon,
        tolerance=tolerance,
        interpolated=not _on_grid(traj, traj.t0 + T),
    )


def transient_horizon(fit: DecayFit, tol: float, scale: float = 1.0) -> float:
    """Time after which ``C scale exp(-omega t)`` drops below ``tol``."""
    if not fit.omega > 0.0:
        raise ParameterError(f"transient horizon needs omega > 0, got {fit.omega}", stage="recurrence")
    if not tol > 0.0:
        raise ParameterError("tolerance must be positive", stage="recurrence")
    if fit.C * scale <= tol:
        return 0.0
    return math.log(fit.C * scale / tol) / fit.omega


def orbit_collapse_check(
    traj_a: Trajectory, traj_b: Trajectory, window: tuple[float, float], norm_kind: str | int = "L2"
) -> float:
    """Largest distance between two runs at matching times in ``window``."""
    if traj_a.grid != traj_b.grid:
        raise ParameterError("runs use different grids", stage="recurrence")
    times = traj_a.window(*window).times
    return float(np.max(_distance(traj_a, times, traj_b, times, _norm_order(norm_kind))))


# ----------------------------------------------------------------------
# Quasi-periodic forcing
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RecurrenceRun:
    """How to realize a forced run: start from rest at ``t_start``."""

    cfg: NonlinearRunConfig
    grid: Grid
    t_start: float
    stride: int = 1

    def evolve(self, forcing: ForcingSignal, t_end: float) -> Trajectory:
        cfg = replace(self.cfg, forcing=forcing)
        return evolve_nonlinear(Field.zeros(self.grid), cfg, (self.t_start, t_end), self.stride)


def quasi_claim1_check(
    base: ForcingSignal, h: float, run: RecurrenceRun, window: tuple[float, float]
) -> float:
    """Sup over ``window`` of ``|u_a(t + h) - u_b(t)|``.

    Run a uses the torus phase of ``base``; run b uses that phase advanced by
    ``h`` times the frequency vector.
    """
    if base.variant != "quasi_periodic":
        raise ParameterError("claim 1 needs a quasi-periodic signal", stage="recurrence")
    t_lo, t_hi = window
    if t_lo < run.t_start:
        raise CoverageError("comparison window starts before the runs", stage="recurrence")
    phases = np.asarray(base.spec["phases"]) + h * np.asarray(base.spec["frequencies"])
    shifted = base.with_torus_phase(phases.tolist())
    traj_a = run.evolve(base, t_hi + h)
    traj_b = run.evolve(shifted, t_hi)
    times = traj_b.window(t_lo, t_hi).times
    return float(np.max(_distance(traj_a, times + h, traj_b, times, 0)))


class HullSampler:
    """``U(phase) = u_phase(t = 0)`` for runs started from rest at ``run.t_start < 0``."""

    def __init__(self, base: ForcingSignal, run: RecurrenceRun):
        if base.variant != "quasi_periodic":
            raise ParameterError("hull sampling needs a quasi-periodic signal", stage="recurrence")
        if not run.t_start < 0.0:
            raise ParameterError("hull runs must start before t = 0", stage="recurrence")
        self.base = base
        self.run = run
        self.dimension = len(base.spec["frequencies"])

    def __call__(self, phases) -> Field:
        traj = self.run.evolve(self.base.with_torus_phase(list(phases)), 0.0)
        return traj.snapshot(len(traj) - 1)


def hull_sampler(base: ForcingSignal, run: RecurrenceRun) -> HullSampler:
    return HullSampler(base, run)


def claim2_period_check(sampler: HullSampler, i: int, phases=None) -> float:
    """``|U(phase + 2 pi e_i) - U(phase)|`` in L2 (``i`` counts from 1)."""
    if not 1 <= i <= sampler.dimension:
        raise ParameterError(
            f"torus direction must lie in 1..{sampler.dimension}, got {i}", stage="recurrence"
        )
    base = np.zeros(sampler.dimension) if phases is None else np.asarray(phases, dtype=float)
    moved = base.copy()
    moved[i - 1] += 2.0 * math.pi
    diff = sampler(moved) - sampler(base)
    return float(sobolev_norms(diff.values[None, :], diff.grid.h, 0)[0])


# ----------------------------------------------------------------------
# Translation numbers
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TranslationScan:
    delta: float
    taus: np.ndarray
    length: float
    resolution: float
    sampled: bool = field(default=False)

    @property
    def max_gap(self) -> float:
        """Longest stretch of ``[0, L]`` without a translation number."""
        if len(self.taus) == 0:
            return math.inf
        points = np.concatenate(([0.0], self.taus, [self.length]))
        return float(np.max(np.diff(points)))


def _signal_shift_bound(signal: ForcingSignal, taus: np.ndarray) -> np.ndarray:
    """``sum |2 a sin(w tau / 2)|``, the sup over all t of ``|phi(t + tau) - phi(t)|``."""
    bound = np.zeros_like(taus)
    for m in signal.modes:
        bound += np.abs(2.0 * m.amplitude * np.sin(0.5 * m.frequency * taus))
    return bound


def bohr_scan(signal, delta: float, length: float, resolution: float) -> TranslationScan:
    """Scan ``tau = k * resolution`` in ``(0, length]`` for delta-translation numbers.

    ``signal`` is a :class:`ForcingSignal` (criterion uniform over all t) or a
    pair ``(times, values)`` of uniformly sampled data (criterion over the
    overlap of the sampled window with its shift; flagged as ``sampled``).
    """
    if not delta > 0.0:
        raise ParameterError(f"delta must be positive, got {delta}", stage="recurrence")
    if not (resolution > 0.0 and length > 0.0):
        raise ParameterError("scan length and resolution must be positive", stage="recurrence")
    count = int(math.floor(length / resolution + 1e-9))
    taus = resolution * np.arange(1, count + 1)

    if isinstance(signal, ForcingSignal):
        steepness = sum(abs(m.amplitude * m.frequency) for m in signal.modes)
        if steepness * resolution > delta:
            logger.warning(
                "scan resolution %.3g is coarse for delta %.3g (signal slope %.3g)",
                resolution, delta, steepness,
            )
        found = taus[_signal_shift_bound(signal, taus) < delta]
        return TranslationScan(delta, found, length, resolution, sampled=False)

    times, values = (np.asarray(a, dtype=float) for a in signal)
    spacing = times[1] - times[0]
    stride = resolution / spacing
    if abs(stride - round(stride)) > 1e-6:
        raise ParameterError("resolution must be a multiple of the sample spacing", stage="recurrence")
    stride = int(round(stride))
    keep = []
    for k in range(1, count + 1):
        shift = k * stride
        if shift >= len(values):
            break
        if np.max(np.abs(values[shift:] - values[:-shift])) < delta:
            keep.append(k * resolution)
    return TranslationScan(delta, np.array(keep), length, resolution, sampled=True)


def scan_soundness(signal: ForcingSignal, scan: TranslationScan, window: float, refine: int = 10) -> bool:
    """Re-check every tau with the sup over ``[0, window]`` sampled ``refine`` times finer."""
    t = np.arange(0.0, window, scan.resolution / refine)
    base = np.asarray(signal.phi(t))
    for tau in scan.taus:
        if np.max(np.abs(np.asarray(signal.phi(t + tau)) - base)) >= scan.delta:
            return False
    return True


@dataclass(frozen=True)
class TranslationBound:
    sigma: float
    lhs: float
    rhs: float
    calibration: float
    floor: float

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.calibration * self.rhs + self.floor


def translation_bound_check(
    y: Trajectory,
    coeffs: CoefficientFields,
    sigma: float,
    fit: DecayFit,
    t_lo: float | None = None,
    calibration: float = DEFAULT_CALIBRATION,
    floor: float = 1e-10,
) -> TranslationBound:
    """Compare ``sup |y(t + sigma) - y(t)|_{H2}`` with the coefficient shifts.

    The right-hand side is ``|da| + |db| + 3 C / omega |df|`` with the fitted
    decay constants; ``calibration`` scales it because the fitted constants
    stand in for unknown analytic ones.
    """
    if sigma < 0.0:
        raise ParameterError("shift must be nonnegative", stage="recurrence")
    if not fit.omega > 0.0:
        raise ParameterError("translation bound needs omega > 0", stage="recurrence")
    start = y.t0 if t_lo is None else t_lo
    stop = y.t_end - sigma
    if stop <= start:
        raise CoverageError(f"window too short for shift {sigma}", stage="recurrence")
    times = y.window(start, stop).times
    lhs = float(np.max(_distance(y, times + sigma, y, times, 2)))
    shifts = shift_norms(coeffs, sigma, times)
    rhs = shifts.a + shifts.b + 3.0 * fit.C / fit.omega * shifts.f
    scale = float(np.max(sobolev_norms(y.values, y.grid.h, 2)))
    return TranslationBound(sigma=sigma, lhs=lhs, rhs=rhs, calibration=calibration, floor=floor * max(scale, 1.0))
