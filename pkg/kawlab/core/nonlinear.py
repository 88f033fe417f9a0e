"""
IMEX integration of the forced nonlinear problem.

The linear part (including the boundary forcing) is treated with the theta
scheme; the convective term ``u u_x``, and in the lifted formulation also the
coefficient terms ``a y_x + b y``, are extrapolated with second-order
Adams-Bashforth; the first step is a Heun predictor-corrector. Boundary
forcing and sources are evaluated at ``t + theta dt``, the midpoint for
Crank-Nicolson.

Two formulations are supported:

* ``direct_u``: u with Dirichlet value ``u(0) = phi(t)``,
* ``lifted_y``: ``y = u + A(x) phi(t)`` with zero Dirichlet data, slope and
  curvature data proportional to phi, and the extra source f.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from kawlab.core.forcing import (
    CoefficientFields,
    ForcingSignal,
    GridCoefficients,
    c1_budget_check,
    c1_norm,
    lifting_map,
)
from kawlab.core.mesh import Field, Grid, build_grid, sobolev_norm, sobolev_norms
from kawlab.core.operator import BoundaryData, DampingParam, DiscreteOperator, build_operator
from kawlab.core.semigroup import StepperConfig, ThetaStepper, Trajectory, step_count
from kawlab.exceptions import BlowUpError, NumericalError, ParameterError

logger = logging.getLogger(__name__)

FORMULATIONS = ("direct_u", "lifted_y")
NONLINEAR_FORMS = ("skew", "advective", "conservative")

Source = Callable[[np.ndarray, float], np.ndarray]


def convective_term(values: np.ndarray, left: float, h: float, form: str = "skew") -> np.ndarray:
    """Discrete ``u u_x`` at interior nodes with ``u(0) = left`` and ``u(1) = 0``."""
    w = np.concatenate(([left], values, [0.0]))
    up, um = w[2:], w[:-2]
    if form == "advective":
        return values * (up - um) / (2.0 * h)
    if form == "conservative":
        return (up**2 - um**2) / (4.0 * h)
    if form == "skew":
        return (values * (up - um) + up**2 - um**2) / (6.0 * h)
    raise ParameterError(f"unknown nonlinear form {form!r}", key="nonlinear_form")


def centered_slope(values: np.ndarray, left: float, h: float) -> np.ndarray:
    w = np.concatenate(([left], values, [0.0]))
    return (w[2:] - w[:-2]) / (2.0 * h)


@dataclass(frozen=True)
class NonlinearRunConfig:
    alpha: float
    forcing: ForcingSignal
    stepper: StepperConfig
    formulation: str = "direct_u"
    nonlinear_form: str = "skew"
    alternate_f: bool = False
    blowup_factor: float = 1e3
    epsilon_budget: float | None = None
    convection: bool = True
    source: Source | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        DampingParam(self.alpha)
        if self.formulation not in FORMULATIONS:
            raise ParameterError(f"unknown formulation {self.formulation!r}", key="formulation")
        if self.nonlinear_form not in NONLINEAR_FORMS:
            raise ParameterError(f"unknown nonlinear form {self.nonlinear_form!r}", key="nonlinear_form")
        if not self.blowup_factor > 1.0:
            raise ParameterError("blow-up factor must exceed 1", key="blowup_factor")


class ForcedSystem:
    """Right-hand side pieces of the forced problem on one grid."""

    def __init__(self, cfg: NonlinearRunConfig, grid: Grid, op: DiscreteOperator | None = None):
        self.cfg = cfg
        self.grid = grid
        self.op = op if op is not None else build_operator(grid, cfg.alpha)
        self.lifting = lifting_map(cfg.alpha)
        self.lifted = cfg.formulation == "lifted_y"
        if self.lifted:
            unit = self.lifting.boundary_data(1.0)
            self.coefficients: GridCoefficients | None = CoefficientFields(
                self.lifting, cfg.forcing, cfg.alternate_f
            ).on_grid(grid)
        else:
            unit = BoundaryData(g0=1.0)
            self.coefficients = None
        self.boundary_unit = self.op.boundary_vector(unit)

    def left_value(self, t: float) -> float:
        return 0.0 if self.lifted else self.cfg.forcing.phi(t)

    def known_terms(self, t: float) -> np.ndarray:
        """State-independent part: boundary forcing, lifted source f, injected source."""
        out = self.boundary_unit * self.cfg.forcing.phi(t)
        if self.coefficients is not None:
            out = out + self.coefficients.at(t)[2]
        if self.cfg.source is not None:
            out = out + self.cfg.source(self.grid.nodes, t)
        return out

    def state_terms(self, values: np.ndarray, t: float) -> np.ndarray:
        """Explicitly extrapolated part: convection and, when lifted, ``a y_x + b y``."""
        h = self.grid.h
        left = self.left_value(t)
        out = np.zeros_like(values)
        if self.cfg.convection:
            out -= convective_term(values, left, h, self.cfg.nonlinear_form)
        if self.coefficients is not None:
            a, b, _ = self.coefficients.at(t)
            out -= a * centered_slope(values, 0.0, h) + b * values
        return out


def _imex_advance(
    stepper: ThetaStepper,
    system: ForcedSystem,
    u: np.ndarray,
    t: float,
    explicit: np.ndarray,
    previous: np.ndarray | None,
) -> np.ndarray:
    """One step from ``t``; ``previous`` is None on the Heun start."""
    dt, theta = stepper.cfg.dt, stepper.cfg.theta
    known = system.known_terms(t + theta * dt)
    if previous is None:
        predictor = stepper.advance(u, known + explicit)
        averaged = 0.5 * (explicit + system.state_terms(predictor, t + dt))
        return stepper.advance(u, known + averaged)
    return stepper.advance(u, known + 1.5 * explicit - 0.5 * previous)


def step_nonlinear(
    u: Field,
    t: float,
    cfg: NonlinearRunConfig,
    op: DiscreteOperator | None = None,
    history: np.ndarray | None = None,
) -> tuple[Field, np.ndarray]:
    """One IMEX step from ``t`` to ``t + dt``.

    ``history`` is the explicit state term of the previous step; ``None``
    makes this a Heun start. Returns the new state and the explicit term at
    ``t`` to pass as ``history`` next time.
    """
    system = ForcedSystem(cfg, u.grid, op)
    stepper = ThetaStepper(system.op, cfg.stepper)
    explicit = system.state_terms(u.values, t)
    return Field(u.grid, _imex_advance(stepper, system, u.values, t, explicit, history)), explicit


def evolve_nonlinear(
    initial: Field,
    cfg: NonlinearRunConfig,
    t_span: tuple[float, float],
    stride: int = 1,
) -> Trajectory:
    """Integrate from ``initial`` at ``t_span[0]`` to ``t_span[1]``.

    The state is u for ``direct_u`` and y for ``lifted_y``; the returned
    trajectory holds the native variable of the formulation.
    """
    t0, t1 = (float(t) for t in t_span)
    if not t1 >= t0:
        raise ParameterError(f"time span must be increasing, got {t_span}", key="t_span")
    if stride < 1:
        raise ParameterError(f"stride must be at least 1, got {stride}", key="stride")
    grid = initial.grid
    system = ForcedSystem(cfg, grid)
    stepper = ThetaStepper(system.op, cfg.stepper)
    dt, theta = cfg.stepper.dt, cfg.stepper.theta
    steps = step_count(t1 - t0, dt)
    c1_budget_check(cfg.forcing, cfg.epsilon_budget)

    scale = max(sobolev_norm(initial, 0, system.left_value(t0)), c1_norm(cfg.forcing))
    limit = cfg.blowup_factor * scale
    h = grid.h

    u = initial.values.copy()
    snapshots = [u.copy()]
    lefts = [system.left_value(t0)]
    explicit = system.state_terms(u, t0)
    previous = None

    for k in range(1, steps + 1):
        t = t0 + k * dt
        u = _imex_advance(stepper, system, u, t - dt, explicit, previous)
        norm = math.sqrt(h * float(u @ u))
        if not math.isfinite(norm) or (scale > 0.0 and norm > limit):
            raise BlowUpError(
                f"solution norm {norm:.3e} left the small-data regime at t={t:.6g} "
                f"(limit {limit:.3e})",
                stage="nonlinear",
            )
        previous = explicit
        explicit = system.state_terms(u, t)
        if k % stride == 0:
            snapshots.append(u.copy())
            lefts.append(system.left_value(t))

    return Trajectory(
        grid=grid,
        t0=t0,
        dt=dt * stride,
        values=np.array(snapshots),
        left=np.array(lefts),
        meta={
            "kind": "nonlinear",
            "alpha": cfg.alpha,
            "theta": theta,
            "step_dt": dt,
            "formulation": cfg.formulation,
            "nonlinear_form": cfg.nonlinear_form,
            "forcing": cfg.forcing.describe(),
        },
    )


def lifted_to_u(traj: Trajectory, forcing: ForcingSignal, alpha: float) -> Trajectory:
    """Map a lifted trajectory back to u = y - A(x) phi(t)."""
    profile = lifting_map(alpha).profile(traj.grid.nodes)
    phi = np.asarray(forcing.phi(traj.times))
    meta = dict(traj.meta, formulation="direct_u", lifted_source=True)
    return Trajectory(
        grid=traj.grid,
        t0=traj.t0,
        dt=traj.dt,
        values=traj.values - phi[:, None] * profile[None, :],
        left=phi,
        meta=meta,
    )


def sup_norm_X(traj: Trajectory, t_lo: float | None = None, t_hi: float | None = None) -> float:
    """Largest discrete H2 norm over the snapshots in ``[t_lo, t_hi]``."""
    part = traj.window(traj.t0 if t_lo is None else t_lo, traj.t_end if t_hi is None else t_hi)
    if len(part) == 0:
        raise ParameterError("empty time window", stage="nonlinear")
    return float(np.max(sobolev_norms(part.values, part.grid.h, 2, part.left, 0.0)))


# ----------------------------------------------------------------------
# Manufactured solutions
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ManufacturedSolution:
    """``u*(x, t) = T(t) P(x)`` with a polynomial profile P."""

    profile: Polynomial
    time_factor: Callable[[float], float]
    time_derivative: Callable[[float], float]
    name: str = "manufactured"
    nonlinear: bool = True

    def value(self, x, t: float):
        return self.time_factor(t) * self.profile(np.asarray(x))

    def source(self, x, t: float):
        """Forcing that makes u* solve ``u_t + u_xxx - u_xxxxx + u u_x = s``."""
        x = np.asarray(x)
        p = self.profile
        tf = self.time_factor(t)
        out = self.time_derivative(t) * p(x) + tf * (p.deriv(3)(x) - p.deriv(5)(x))
        if self.nonlinear:
            out = out + tf**2 * p(x) * p.deriv(1)(x)
        return out

    def discrete_source(self, grid: Grid, alpha: float, nonlinear_form: str = "skew") -> Source:
        """Source whose semi-discrete solution is exactly ``u*`` at the nodes.

        The discrete operator and convective term replace their continuous
        counterparts, so refining dt alone measures the time error.
        """
        values = self.profile(grid.nodes)
        action = build_operator(grid, alpha).apply(values)
        convection = convective_term(values, 0.0, grid.h, nonlinear_form) if self.nonlinear else 0.0

        def source(x, t: float):
            tf = self.time_factor(t)
            return self.time_derivative(t) * values - tf * action + tf**2 * convection

        return source

    def boundary_residual(self, alpha: float) -> float:
        """How far P is from the homogeneous boundary conditions."""
        p = self.profile
        d1, d2 = p.deriv(1), p.deriv(2)
        return max(abs(p(0.0)), abs(p(1.0)), abs(d1(0.0)), abs(d1(1.0)), abs(d2(1.0) - alpha * d2(0.0)))


TIME_FACTORS: dict[str, tuple[Callable[[float], float], Callable[[float], float]]] = {
    "cos": (lambda t: math.cos(math.pi * t), lambda t: -math.pi * math.sin(math.pi * t)),
    "exp": (lambda t: math.exp(-t), lambda t: -math.exp(-t)),
    "sin": (lambda t: math.sin(2.0 * math.pi * t), lambda t: 2.0 * math.pi * math.cos(2.0 * math.pi * t)),
}


def standard_manufactured(alpha: float, nonlinear: bool = True, time_factor: str = "cos") -> ManufacturedSolution:
    """``T(t) x^2 (1-x)^2 (1 + (alpha-1) x)``, which meets every homogeneous condition.

    ``time_factor`` picks T: ``cos`` is cos(pi t), ``exp`` is exp(-t), ``sin``
    is sin(2 pi t).
    """
    if time_factor not in TIME_FACTORS:
        raise ParameterError(
            f"time factor must be one of {sorted(TIME_FACTORS)}, got {time_factor!r}", key="time_factor"
        )
    value, derivative = TIME_FACTORS[time_factor]
    profile = Polynomial([0.0, 0.0, 1.0, -2.0, 1.0]) * Polynomial([1.0, alpha - 1.0])
    name = "standard" if nonlinear else "standard-linear"
    return ManufacturedSolution(
        profile=profile,
        time_factor=value,
        time_derivative=derivative,
        name=name if time_factor == "cos" else f"{name}-{time_factor}",
        nonlinear=nonlinear,
    )


def mms_error(traj: Trajectory, manufactured: ManufacturedSolution) -> float:
    """Largest discrete L2 error over the snapshots of ``traj``."""
    exact = np.array([manufactured.value(traj.grid.nodes, t) for t in traj.times])
    errors = sobolev_norms(traj.values - exact, traj.grid.h, 0)
    return float(np.max(errors))


@dataclass(frozen=True)
class ConvergenceReport:
    parameter: str
    steps: list[float]
    errors: list[float]
    orders: list[float | None]

    @property
    def observed_order(self) -> float | None:
        return self.orders[-1] if self.orders else None


def _orders(steps: list[float], errors: list[float]) -> list[float | None]:
    orders: list[float | None] = []
    for (s0, e0), (s1, e1) in zip(zip(steps, errors), zip(steps[1:], errors[1:])):
        if e0 > 0.0 and e1 > 0.0:
            orders.append(math.log(e0 / e1) / math.log(s0 / s1))
        else:
            orders.append(None)
    return orders


def residual_mms(
    manufactured: ManufacturedSolution,
    alpha: float,
    *,
    refine: str = "space",
    ns: tuple[int, ...] = (16, 32, 64),
    dts: tuple[float, ...] = (1e-3,),
    t_final: float = 0.1,
    theta: float = 0.5,
    nonlinear_form: str = "skew",
    source: Source | None = None,
) -> ConvergenceReport:
    """Refinement study against a manufactured solution.

    ``refine="space"`` runs every n in ``ns`` at ``dts[0]`` with the continuous
    source of u*. ``refine="time"`` runs every dt in ``dts`` on ``ns[0]`` with
    the discrete source, whose semi-discrete solution is u* itself, so the
    error against u* is the time error alone. Both measure the error against
    the exact u*. ``source`` overrides either source (used to detect
    mismatched pairs).
    """
    if manufactured.boundary_residual(alpha) > 1e-10:
        raise ParameterError(
            "manufactured profile violates the homogeneous boundary conditions",
            stage="mms",
        )
    if refine not in ("space", "time"):
        raise ParameterError(f"refine must be 'space' or 'time', got {refine!r}", key="refine")

    def run(n: int, dt: float) -> float:
        grid = build_grid(n)
        if source is not None:
            rhs = source
        elif refine == "time":
            rhs = manufactured.discrete_source(grid, alpha, nonlinear_form)
        else:
            rhs = manufactured.source
        cfg = NonlinearRunConfig(
            alpha=alpha,
            forcing=ForcingSignal.zero(),
            stepper=StepperConfig(dt=dt, theta=theta),
            nonlinear_form=nonlinear_form,
            convection=manufactured.nonlinear,
            source=rhs,
        )
        u0 = Field(grid, manufactured.value(grid.nodes, 0.0))
        traj = evolve_nonlinear(u0, cfg, (0.0, t_final), stride=step_count(t_final, dt))
        return mms_error(traj, manufactured)

    scale = max(
        float(np.max(np.abs(manufactured.value(np.linspace(0.0, 1.0, 201), t))))
        for t in (0.0, 0.5 * t_final, t_final)
    )

    if refine == "space":
        steps = [build_grid(n).h for n in ns]
        errors = [run(n, dts[0]) for n in ns]
    else:
        steps = list(dts)
        errors = [run(ns[0], dt) for dt in dts]
    if scale > 0.0 and errors[-1] > 0.5 * scale:
        raise NumericalError(
            f"error {errors[-1]:.3e} at the finest {refine} step: source does not match the solution",
            stage="mms",
        )

    report = ConvergenceReport(refine, steps, errors, _orders(steps, errors))
    logger.info("mms %s refinement: errors=%s orders=%s", refine, errors, report.orders)
    return report
