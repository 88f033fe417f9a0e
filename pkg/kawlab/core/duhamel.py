"""
Truncated Duhamel map for the lifted system and its Picard fixed point.

For a given history ``y`` on ``[t_lo - T_cut, t_hi]`` the map returns

    (Psi y)(t) = int_{t_lo - T_cut}^{t} S(t - s) G(y(s), s) ds,

with ``G(y, t) = -(y y_x + a y_x + b y) + f + (boundary forcing)``, computed
by one forward theta-scheme sweep from zero with the integrand known at every
step. A fixed point is a bounded solution of the lifted problem whose memory
of the cut-off start decays like ``exp(-omega T_cut)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from kawlab.core.forcing import CoefficientFields, c1_norm, coefficient_norms, lifting_map
from kawlab.core.mesh import Grid, sobolev_norms
from kawlab.core.nonlinear import ForcedSystem, NonlinearRunConfig
from kawlab.core.semigroup import DecayFit, ThetaStepper, Trajectory, step_count
from kawlab.exceptions import CoverageError, NonContractionError, ParameterError

logger = logging.getLogger(__name__)

NON_CONTRACTION_STREAK = 3


@dataclass(frozen=True)
class DuhamelWindow:
    t_lo: float
    t_hi: float
    t_cut: float

    def __post_init__(self) -> None:
        if not self.t_hi > self.t_lo:
            raise ParameterError("window must satisfy t_lo < t_hi", key="window")
        if self.t_cut < 0.0:
            raise ParameterError("truncation horizon must be nonnegative", key="window.t_cut")

    @property
    def start(self) -> float:
        return self.t_lo - self.t_cut


def truncation_horizon(fit: DecayFit, tol: float, source_scale: float) -> float:
    """Smallest T_cut with ``C scale exp(-omega T_cut) / omega <= tol``."""
    if not fit.omega > 0.0:
        raise ParameterError(
            f"truncation needs a positive decay rate, got omega={fit.omega}", stage="duhamel"
        )
    if not tol > 0.0:
        raise ParameterError("tolerance must be positive", stage="duhamel")
    if source_scale <= 0.0:
        return 0.0
    return max(0.0, math.log(fit.C * source_scale / (fit.omega * tol)) / fit.omega)


def ball_radius(fit: DecayFit, f_norm: float) -> float:
    """Radius ``3 C / omega * |f|_X`` of the ball the Picard map is expected to keep."""
    if not fit.omega > 0.0:
        raise ParameterError("ball radius needs a positive decay rate", stage="duhamel")
    return 3.0 * fit.C / fit.omega * f_norm


class DuhamelMap:
    """Psi on a fixed window, with the state-independent integrand cached."""

    def __init__(self, cfg: NonlinearRunConfig, grid: Grid, window: DuhamelWindow):
        if cfg.formulation != "lifted_y":
            cfg = replace(cfg, formulation="lifted_y")
        self.cfg = cfg
        self.grid = grid
        self.window = window
        self.system = ForcedSystem(cfg, grid)
        self.stepper = ThetaStepper(self.system.op, cfg.stepper)
        dt = cfg.stepper.dt
        steps = step_count(window.t_hi - window.start, dt)
        self.times = window.start + dt * np.arange(steps + 1)
        self.known = np.array([self.system.known_terms(t) for t in self.times])
        self.first_window_index = int(round(window.t_cut / dt))

    def integrand(self, values: np.ndarray) -> np.ndarray:
        return self.known + np.array(
            [self.system.state_terms(row, t) for row, t in zip(values, self.times)]
        )

    def __call__(self, values: np.ndarray) -> np.ndarray:
        theta = self.cfg.stepper.theta
        g = self.integrand(values)
        out = np.zeros_like(g)
        z = out[0]
        for j in range(len(self.times) - 1):
            z = self.stepper.advance(z, theta * g[j + 1] + (1.0 - theta) * g[j])
            out[j + 1] = z
        return out

    def window_norm(self, values: np.ndarray) -> float:
        """Sup over ``[t_lo, t_hi]`` of the discrete H2 norm."""
        part = values[self.first_window_index :]
        return float(np.max(sobolev_norms(part, self.grid.h, 2)))

    def as_trajectory(self, values: np.ndarray) -> Trajectory:
        return Trajectory(
            grid=self.grid,
            t0=float(self.times[0]),
            dt=self.cfg.stepper.dt,
            values=values,
            meta={
                "kind": "duhamel",
                "alpha": self.cfg.alpha,
                "theta": self.cfg.stepper.theta,
                "step_dt": self.cfg.stepper.dt,
                "formulation": "lifted_y",
                "forcing": self.cfg.forcing.describe(),
                "window": [self.window.t_lo, self.window.t_hi, self.window.t_cut],
            },
        )

    def values_of(self, y: Trajectory) -> np.ndarray:
        """Rows of ``y`` on this map's time grid."""
        if y.grid != self.grid:
            raise ParameterError("history lives on a different grid", stage="duhamel")
        if abs(y.dt - self.cfg.stepper.dt) > 1e-12 * max(1.0, y.dt):
            raise CoverageError("history must be sampled at every time step", stage="duhamel")
        j0 = y.index_of(float(self.times[0]))
        j1 = y.index_of(float(self.times[-1]))
        return y.values[j0 : j1 + 1]


def psi_apply(y: Trajectory, cfg: NonlinearRunConfig, window: DuhamelWindow) -> Trajectory:
    """One application of the truncated Duhamel map to the history ``y``."""
    psi = DuhamelMap(cfg, y.grid, window)
    return psi.as_trajectory(psi(psi.values_of(y)))


@dataclass(frozen=True)
class FixedPointReport:
    iterations: int
    factors: list[float] = field(default_factory=list)
    final_residual: float = 0.0
    sup_norm: float = 0.0
    converged: bool = True
    tol: float = 0.0
    t_cut: float = 0.0
    rho: float | None = None


def fixed_point_solve(
    cfg: NonlinearRunConfig,
    grid: Grid,
    window: DuhamelWindow,
    tol: float,
    max_iter: int = 50,
    fit: DecayFit | None = None,
) -> tuple[Trajectory, FixedPointReport]:
    """Picard iteration ``y_{k+1} = Psi y_k`` from ``y_0 = 0``.

    Stops once ``|y_{k+1} - y_k|_X < tol``. Three consecutive contraction
    factors of at least one abort the iteration.
    """
    if not tol > 0.0:
        raise ParameterError("tolerance must be positive", key="tol")
    psi = DuhamelMap(cfg, grid, window)
    scale = max(c1_norm(cfg.forcing), 1e-300)
    y = np.zeros((len(psi.times), grid.n))
    factors: list[float] = []
    streak = 0
    last = None
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        y_next = psi(y)
        diff = psi.window_norm(y_next - y)
        if last is not None and last > 1e-14 * scale:
            factor = diff / last
            factors.append(factor)
            streak = streak + 1 if factor >= 1.0 else 0
            if streak >= NON_CONTRACTION_STREAK:
                raise NonContractionError(
                    f"Picard factors {factors[-NON_CONTRACTION_STREAK:]} did not contract",
                    stage="duhamel",
                )
        logger.debug("picard iteration %d: |dy|_X=%.3e", iterations, diff)
        y = y_next
        if diff < tol:
            converged = True
            break
        last = diff

    if not converged:
        raise NonContractionError(
            f"Picard iteration did not reach tol={tol:.3e} in {max_iter} iterations",
            stage="duhamel",
        )

    residual = psi.window_norm(psi(y) - y)
    rho = None
    if fit is not None and fit.omega > 0.0:
        coeffs = CoefficientFields(lifting_map(cfg.alpha), cfg.forcing, cfg.alternate_f)
        rho = ball_radius(fit, coefficient_norms(coeffs, psi.times).f)

    report = FixedPointReport(
        iterations=iterations,
        factors=factors,
        final_residual=residual,
        sup_norm=psi.window_norm(y),
        converged=converged,
        tol=tol,
        t_cut=window.t_cut,
        rho=rho,
    )
    logger.info(
        "picard converged in %d iterations (residual %.3e)", iterations, residual
    )
    return psi.as_trajectory(y), report


def mild_solution_residual(
    y: Trajectory, cfg: NonlinearRunConfig, r: float, t: float
) -> float:
    """H2 distance between ``y(t)`` and ``S(t-r) y(r) + int_r^t S(t-s) G(y(s), s) ds``."""
    if not t > r:
        raise ParameterError("mild residual needs r < t", stage="duhamel")
    window = DuhamelWindow(t_lo=r, t_hi=t, t_cut=0.0)
    psi = DuhamelMap(cfg, y.grid, window)
    values = psi.values_of(y)
    theta = cfg.stepper.theta
    g = psi.integrand(values)
    z = values[0]
    for j in range(len(psi.times) - 1):
        z = psi.stepper.advance(z, theta * g[j + 1] + (1.0 - theta) * g[j])
    return float(sobolev_norms(z - values[-1], y.grid.h, 2)[0])
