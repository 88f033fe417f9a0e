"""
Linear time stepping, trajectories, decay fits and smoothing measurements.

The theta-scheme ``(I - theta dt A) u+ = (I + (1 - theta) dt A) u + dt F`` is
evaluated as ``u+ = M^{-1}(u/theta + dt F) - (1 - theta)/theta u`` with
``M = I - theta dt A``, so each step is one banded solve and no explicit
product with A.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.interpolate import CubicSpline

from kawlab.config import get_settings
from kawlab.core.mesh import Field, Grid, sobolev_norm, sobolev_norms
from kawlab.core.operator import DiscreteOperator
from kawlab.exceptions import CoverageError, NumericalError, ParameterError

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 10
NORM_KINDS = ("L2", "H2")


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    theta: float = 0.5

    def __post_init__(self) -> None:
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ParameterError(f"time step must be positive, got {self.dt}", key="stepper.dt")
        if not (0.5 <= self.theta <= 1.0):
            raise ParameterError(
                f"theta must lie in [0.5, 1], got {self.theta}", key="stepper.theta"
            )


def step_count(t_span: float, dt: float) -> int:
    """Number of steps covering ``t_span``; the span must be a multiple of ``dt``."""
    if t_span < 0.0:
        raise ParameterError(f"time span must be nonnegative, got {t_span}")
    steps = int(round(t_span / dt))
    if abs(steps * dt - t_span) > 1e-9 * max(1.0, t_span):
        raise ParameterError(f"time span {t_span} is not a multiple of dt={dt}")
    return steps


class ThetaStepper:
    """Reusable theta-scheme step for a fixed operator and step size."""

    def __init__(self, op: DiscreteOperator, cfg: StepperConfig):
        self.op = op
        self.cfg = cfg
        self._solver = op.shifted_solver(cfg.theta * cfg.dt)
        self._carry = (1.0 - cfg.theta) / cfg.theta

    def advance(self, values: np.ndarray, source: np.ndarray | None = None) -> np.ndarray:
        """One step; ``source`` is the time-weighted explicit right-hand side."""
        rhs = values / self.cfg.theta
        if source is not None:
            rhs = rhs + self.cfg.dt * source
        x = self._solver.solve(rhs)
        if self._carry == 0.0:
            return x
        return x - self._carry * values


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots ``values[j]`` at times ``t0 + j*dt``.

    ``left`` holds the Dirichlet value at x = 0 of every snapshot; the value
    at x = 1 is always zero.
    """

    grid: Grid
    t0: float
    dt: float
    values: np.ndarray
    left: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.shape[1] != self.grid.n:
            raise ParameterError("snapshot length does not match the grid", stage="trajectory")
        object.__setattr__(self, "values", values)
        left = np.zeros(values.shape[0]) if self.left is None else np.asarray(self.left, dtype=float)
        if left.shape != (values.shape[0],):
            raise ParameterError("one boundary value per snapshot is required", stage="trajectory")
        object.__setattr__(self, "left", left)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    def snapshot(self, j: int) -> Field:
        return Field(self.grid, self.values[j])

    def norms(self, kind: str = "L2") -> np.ndarray:
        if kind not in NORM_KINDS:
            raise ParameterError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")
        k = 0 if kind == "L2" else 2
        return sobolev_norms(self.values, self.grid.h, k, self.left, 0.0)

    def index_of(self, t: float) -> int:
        """Snapshot index for time ``t``, which must sit on the snapshot grid."""
        j = int(round((t - self.t0) / self.dt))
        if j < 0 or j >= len(self) or abs(self.t0 + j * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise CoverageError(
                f"time {t} is not a snapshot time of [{self.t0}, {self.t_end}] step {self.dt}",
                stage="trajectory",
            )
        return j

    def window(self, t_lo: float, t_hi: float) -> Trajectory:
        if t_lo < self.t0 - 1e-9 or t_hi > self.t_end + 1e-9:
            raise CoverageError(
                f"window [{t_lo}, {t_hi}] exceeds trajectory [{self.t0}, {self.t_end}]",
                stage="trajectory",
            )
        j0 = int(math.ceil((t_lo - self.t0) / self.dt - 1e-9))
        j1 = int(math.floor((t_hi - self.t0) / self.dt + 1e-9))
        return replace(
            self,
            t0=self.t0 + j0 * self.dt,
            values=self.values[j0 : j1 + 1],
            left=self.left[j0 : j1 + 1],
        )

    def interpolate(self, t: float | np.ndarray) -> np.ndarray:
        """Cubic-spline values between snapshots (rows match ``t``)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t0 - 1e-9) or np.any(t > self.t_end + 1e-9):
            raise CoverageError("interpolation time outside the trajectory", stage="trajectory")
        if len(self) < 4:
            raise CoverageError("cubic interpolation needs at least four snapshots", stage="trajectory")
        spline = CubicSpline(self.times, self.values, axis=0)
        return spline(t)


# ----------------------------------------------------------------------
# Stepping
# ----------------------------------------------------------------------


def step_linear(u: Field, op: DiscreteOperator, cfg: StepperConfig) -> Field:
    """One theta-scheme step of the homogeneous linear problem."""
    if u.grid != op.grid:
        raise ParameterError("field and operator use different grids", stage="semigroup")
    return Field(u.grid, ThetaStepper(op, cfg).advance(u.values))


def evolve_linear(
    u0: Field, op: DiscreteOperator, cfg: StepperConfig, t_final: float, stride: int = 1
) -> Trajectory:
    """March the homogeneous problem from ``u0`` and keep every ``stride``-th step."""
    if stride < 1:
        raise ParameterError(f"stride must be at least 1, got {stride}", key="stride")
    steps = step_count(t_final, cfg.dt)
    stepper = ThetaStepper(op, cfg)
    snapshots = [u0.values.copy()]
    u = u0.values
    for k in range(1, steps + 1):
        u = stepper.advance(u)
        if k % stride == 0:
            snapshots.append(u)
    logger.debug("linear run: %d steps, %d snapshots", steps, len(snapshots))
    return Trajectory(
        grid=u0.grid,
        t0=0.0,
        dt=cfg.dt * stride,
        values=np.array(snapshots),
        meta={"alpha": op.alpha, "theta": cfg.theta, "step_dt": cfg.dt, "kind": "linear"},
    )


def dense_propagator(op: DiscreteOperator, t: float) -> np.ndarray:
    """``exp(t A)`` of the dense matrix, used as a reference oracle."""
    if t < 0.0:
        raise ParameterError(f"propagator time must be nonnegative, got {t}")
    limit = get_settings().propagator_limit
    if op.n > limit:
        raise ParameterError(f"n={op.n} exceeds the dense propagator limit of {limit}")
    return scipy.linalg.expm(t * op.to_dense())


def random_initial_data(grid: Grid, rng: np.random.Generator, modes: int = 4) -> Field:
    """Smooth random data vanishing to second order at both ends.

    ``x^2 (1-x)^2`` times a random Legendre series in ``2x - 1``, normalized to
    unit discrete L2 norm.
    """
    coeffs = rng.standard_normal(modes)
    x = grid.nodes
    values = x**2 * (1.0 - x) ** 2 * np.polynomial.legendre.legval(2.0 * x - 1.0, coeffs)
    u = Field(grid, values)
    norm = sobolev_norm(u, 0)
    if norm == 0.0:
        return u
    return u * (1.0 / norm)


def rough_initial_data(grid: Grid, rng: np.random.Generator) -> Field:
    """White noise at the interior nodes, zero at both ends, unit discrete L2 norm."""
    u = Field(grid, rng.standard_normal(grid.n))
    return u * (1.0 / sobolev_norm(u, 0))


# ----------------------------------------------------------------------
# Decay and smoothing
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    C: float
    omega: float
    rmse: float
    norm_kind: str
    t_min: float
    points: int
    slack: float


def fit_decay(
    traj: Trajectory, norm_kind: str = "L2", t_min: float = 0.5, floor: float = 1e-10
) -> DecayFit:
    """Least-squares fit of ``log(|u(t)|/|u0|) ~ log C - omega t`` for ``t >= t_min``.

    Snapshots whose norm fell below ``floor * |u0|`` are ignored; below that
    level the series is dominated by roundoff.
    """
    norms = traj.norms(norm_kind)
    base = norms[0]
    if not base > 0.0:
        raise NumericalError("cannot fit decay of a zero initial state", stage="decay_fit")
    times = traj.times
    mask = (times >= t_min - 1e-12) & (norms > floor * base)
    count = int(mask.sum())
    if count < MIN_FIT_POINTS:
        raise NumericalError(
            f"degenerate decay fit: only {count} usable snapshots for t >= {t_min}",
            stage="decay_fit",
        )
    t = times[mask]
    logs = np.log(norms[mask] / base)
    slope, intercept = np.polyfit(t, logs, 1)
    residuals = logs - (intercept + slope * t)
    envelope = np.exp(intercept + slope * t)
    slack = float(np.max(norms[mask] / base / envelope) - 1.0)
    return DecayFit(
        C=float(math.exp(intercept)),
        omega=float(-slope),
        rmse=float(np.sqrt(np.mean(residuals**2))),
        norm_kind=norm_kind,
        t_min=float(t_min),
        points=count,
        slack=slack,
    )


@dataclass(frozen=True)
class SmoothingRatio:
    t: float
    ratio: float
    bound_shape: float


def smoothing_bound_shape(t: float, alpha: float) -> float:
    return math.sqrt(1.0 / ((1.0 - alpha**2) * t) + 1.0)


def smoothing_ratio(u0: Field, op: DiscreteOperator, t: float, cfg: StepperConfig) -> SmoothingRatio:
    """``|S(t) u0|_{H2} / |u0|_{L2}`` next to its expected shape in t."""
    if t <= 0.0:
        raise ParameterError(f"smoothing time must be positive, got {t}")
    base = sobolev_norm(u0, 0)
    if base == 0.0:
        raise ParameterError("smoothing ratio of a zero field is undefined")
    traj = evolve_linear(u0, op, cfg, t, stride=step_count(t, cfg.dt) or 1)
    final = traj.snapshot(len(traj) - 1)
    return SmoothingRatio(
        t=float(t),
        ratio=sobolev_norm(final, 2) / base,
        bound_shape=smoothing_bound_shape(t, op.alpha),
    )


@dataclass(frozen=True)
class SmoothingConstant:
    C: float
    spread: float
    ratios: tuple[SmoothingRatio, ...]


def smoothing_constant(ratios: list[SmoothingRatio]) -> SmoothingConstant:
    """Best constant in ``ratio <= C * shape(t)`` and how much ``ratio/shape`` varies."""
    if not ratios:
        raise ParameterError("need at least one smoothing measurement")
    scaled = np.array([r.ratio / r.bound_shape for r in ratios])
    low = float(np.min(scaled))
    return SmoothingConstant(
        C=float(np.max(scaled)),
        spread=float(np.max(scaled) / low) if low > 0.0 else math.inf,
        ratios=tuple(ratios),
    )
