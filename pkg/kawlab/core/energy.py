"""
Energy, boundary observation and the decay-constant chain along linear runs.

All checks take the boundary curvature ``u_xx(0, t)`` from one of two
sources: ``trace="scheme"`` uses the one-sided curvature exposed by the
discrete operator (the one its energy identity is written in), while
``trace="stencil"`` uses the sixth-point one-sided difference. Time integrals
of squared curvatures use the midpoint of consecutive snapshots, which is the
level the theta = 1/2 energy identity lives on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from kawlab.core.mesh import Field, boundary_traces_many, sobolev_norms
from kawlab.core.operator import BoundaryData, DiscreteOperator, build_operator
from kawlab.core.semigroup import Trajectory
from kawlab.exceptions import NumericalError, ParameterError

logger = logging.getLogger(__name__)

TRACES = ("scheme", "stencil")
DEFAULT_RTOL = 1e-4
ENERGY_FLOOR = 1e-16


def energy(u: Field) -> float:
    return 0.5 * u.grid.h * float(u.values @ u.values)


def energy_series(traj: Trajectory) -> np.ndarray:
    return 0.5 * traj.norms("L2") ** 2


def curvature_series(traj: Trajectory, alpha: float, trace: str = "scheme") -> np.ndarray:
    """``u_xx(0, t_j)`` for every snapshot."""
    if trace == "scheme":
        op = _operator(traj, alpha)
        z0, _ = op.scheme_curvatures(traj.values, BoundaryData(g0=traj.left))
        return np.asarray(z0)
    if trace == "stencil":
        return boundary_traces_many(traj.values, traj.grid.h, traj.left, 0.0)[2]
    raise ParameterError(f"trace must be one of {TRACES}, got {trace!r}")


def _operator(traj: Trajectory, alpha: float) -> DiscreteOperator:
    return build_operator(traj.grid, alpha)


def curvature_integral(traj: Trajectory, alpha: float, trace: str = "scheme") -> float:
    """``int u_xx(0, t)^2 dt`` over the whole trajectory (midpoint rule)."""
    z = curvature_series(traj, alpha, trace)
    if len(z) < 2:
        return 0.0
    mid = 0.5 * (z[1:] + z[:-1])
    return float(traj.dt * np.sum(mid**2))


def _require_window(traj: Trajectory, T: float) -> Trajectory:
    if not T > 0.0:
        raise ParameterError(f"observation time must be positive, got {T}")
    return traj.window(traj.t0, traj.t0 + T)


# ----------------------------------------------------------------------
# Energy identity
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyRateCheck:
    max_residual: float
    max_flux: float
    energy0: float

    @property
    def relative(self) -> float:
        return self.max_residual / self.energy0 if self.energy0 > 0.0 else 0.0


def energy_rate_check(
    traj: Trajectory, alpha: float, trace: str = "scheme", t_min: float = 0.0
) -> EnergyRateCheck:
    """Largest ``|dE/dt - (alpha^2 - 1)/2 u_xx(0, t)^2|`` over interior snapshots."""
    if len(traj) < 3:
        raise NumericalError("energy rate check needs at least three snapshots", stage="energy")
    e = energy_series(traj)
    z = curvature_series(traj, alpha, trace)
    rate = (e[2:] - e[:-2]) / (2.0 * traj.dt)
    flux = 0.5 * (alpha**2 - 1.0) * z[1:-1] ** 2
    mask = traj.times[1:-1] >= t_min - 1e-12
    if not mask.any():
        raise NumericalError(f"no interior snapshots after t={t_min}", stage="energy")
    residual = np.abs(rate - flux)[mask]
    return EnergyRateCheck(
        max_residual=float(residual.max()),
        max_flux=float(np.abs(flux[mask]).max()),
        energy0=float(e[0]),
    )


@dataclass(frozen=True)
class MomentCheck:
    max_residual: float
    scale: float

    @property
    def relative(self) -> float:
        return self.max_residual / self.scale if self.scale > 0.0 else 0.0


def moment_identity_check(
    traj: Trajectory, alpha: float, trace: str = "stencil", t_min: float = 0.0
) -> MomentCheck:
    """``d/dt int x u^2 = -3 int u_x^2 - 5 int u_xx^2 + alpha^2 u_xx(0)^2`` along a run."""
    if len(traj) < 3:
        raise NumericalError("moment check needs at least three snapshots", stage="energy")
    h = traj.grid.h
    x = traj.grid.full_nodes
    w = np.hstack([traj.left[:, None], traj.values, np.zeros((len(traj), 1))])
    moment = trapezoid(x * w**2, dx=h, axis=1)

    ux0, ux1, uxx0, uxx1 = boundary_traces_many(traj.values, h, traj.left, 0.0)
    du = np.empty_like(w)
    du[:, 1:-1] = (w[:, 2:] - w[:, :-2]) / (2.0 * h)
    du[:, 0], du[:, -1] = ux0, ux1
    d2u = np.empty_like(w)
    d2u[:, 1:-1] = (w[:, 2:] - 2.0 * w[:, 1:-1] + w[:, :-2]) / h**2
    d2u[:, 0], d2u[:, -1] = uxx0, uxx1
    slope_term = 3.0 * trapezoid(du**2, dx=h, axis=1)
    curvature_term = 5.0 * trapezoid(d2u**2, dx=h, axis=1)
    boundary_term = alpha**2 * curvature_series(traj, alpha, trace) ** 2

    rate = (moment[2:] - moment[:-2]) / (2.0 * traj.dt)
    rhs = (-slope_term - curvature_term + boundary_term)[1:-1]
    mask = traj.times[1:-1] >= t_min - 1e-12
    if not mask.any():
        raise NumericalError(f"no interior snapshots after t={t_min}", stage="energy")
    scale = float(np.max((slope_term + curvature_term + boundary_term)[1:-1][mask]))
    return MomentCheck(max_residual=float(np.max(np.abs(rate - rhs)[mask])), scale=scale)


# ----------------------------------------------------------------------
# Inequalities
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ObservabilityReport:
    name: str
    T: float
    lhs: float
    rhs: float
    terms: dict = field(default_factory=dict)
    tolerance: float = 0.0

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.slack >= -self.tolerance


def hidden_regularity_check(
    traj: Trajectory, alpha: float, T: float, trace: str = "scheme", rtol: float = DEFAULT_RTOL
) -> ObservabilityReport:
    """``(1 - alpha^2) int_0^T u_xx(0, t)^2 dt <= |u0|^2``."""
    part = _require_window(traj, T)
    observed = curvature_integral(part, alpha, trace)
    lhs = (1.0 - alpha**2) * observed
    rhs = float(part.norms("L2")[0] ** 2)
    return ObservabilityReport(
        name="hidden_regularity",
        T=T,
        lhs=lhs,
        rhs=rhs,
        terms={"boundary_observation": observed, "initial_norm_sq": rhs},
        tolerance=rtol * rhs,
    )


def l2h2_bound_coefficient(alpha: float, T: float) -> float:
    return math.sqrt((1.0 / (1.0 - alpha**2) + 4.0 * T) / 3.0)


def l2h2_bound_check(traj: Trajectory, alpha: float, T: float, rtol: float = DEFAULT_RTOL) -> ObservabilityReport:
    """``|u|_{L2(0,T;H2)} <= sqrt((1/(1-alpha^2) + 4T)/3) |u0|``."""
    part = _require_window(traj, T)
    h2 = sobolev_norms(part.values, part.grid.h, 2, part.left, 0.0)
    lhs = math.sqrt(float(trapezoid(h2**2, dx=part.dt)))
    coefficient = l2h2_bound_coefficient(alpha, T)
    u0 = float(part.norms("L2")[0])
    rhs = coefficient * u0
    return ObservabilityReport(
        name="l2h2_bound",
        T=T,
        lhs=lhs,
        rhs=rhs,
        terms={"coefficient": coefficient, "initial_norm": u0},
        tolerance=rtol * rhs,
    )


def weak_observability_check(
    traj: Trajectory, alpha: float, T: float, trace: str = "scheme", rtol: float = DEFAULT_RTOL
) -> ObservabilityReport:
    """``|u0|^2/2 <= (1/2T) int int u^2 + (1 - alpha^2)/2 int u_xx(0, t)^2``."""
    part = _require_window(traj, T)
    e = energy_series(part)
    interior = float(trapezoid(e, dx=part.dt)) / T
    boundary = 0.5 * (1.0 - alpha**2) * curvature_integral(part, alpha, trace)
    lhs = float(e[0])
    return ObservabilityReport(
        name="weak_observability",
        T=T,
        lhs=lhs,
        rhs=interior + boundary,
        terms={"interior": interior, "boundary": boundary},
        tolerance=rtol * lhs,
    )


# ----------------------------------------------------------------------
# Decay constants
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DecayConstants:
    c1: float
    C_obs: float
    C: float
    T: float
    windows: int
    excluded: int

    @property
    def gamma(self) -> float:
        return self.C / (1.0 + self.C)

    @property
    def nu(self) -> float:
        return math.log1p(1.0 / self.C) / self.T


def constants_from_C(C: float, T: float) -> DecayConstants:
    """Wrap a known aggregate constant (no ensemble behind it)."""
    if not C > 0.0 or not T > 0.0:
        raise ParameterError("C and T must be positive")
    return DecayConstants(c1=math.nan, C_obs=math.nan, C=C, T=T, windows=0, excluded=0)


def decay_constants(
    ensemble: list[Trajectory], T: float, alpha: float, trace: str = "scheme"
) -> DecayConstants:
    """Empirical observability constant and the geometric decay it implies.

    Every full window ``[(j-1)T, jT]`` of every run contributes. Windows whose
    starting energy is below ``1e-16 E(0)`` are roundoff and skipped; runs
    whose boundary observation vanishes identically are excluded.
    """
    if not T > 0.0:
        raise ParameterError(f"window length must be positive, got {T}")
    kappa = 0.5 * (1.0 - alpha**2)
    c1 = 0.0
    obs_ratio = 0.0
    windows = 0
    excluded = 0

    for index, traj in enumerate(ensemble):
        e_all = energy_series(traj)
        if e_all[0] <= 0.0:
            excluded += 1
            logger.warning("ensemble member %d has zero energy; excluded", index)
            continue
        count = int(math.floor((traj.t_end - traj.t0) / T + 1e-9))
        used = 0
        for j in range(count):
            part = traj.window(traj.t0 + j * T, traj.t0 + (j + 1) * T)
            e = energy_series(part)
            if e[0] <= ENERGY_FLOOR * e_all[0]:
                break
            observed = curvature_integral(part, alpha, trace)
            if observed <= 0.0:
                continue
            c1 = max(c1, float(trapezoid(e, dx=part.dt)) / observed)
            obs_ratio = max(obs_ratio, float(e[0]) / observed)
            used += 1
        if used == 0:
            excluded += 1
            logger.warning("ensemble member %d has no observable window; excluded", index)
        windows += used

    if windows == 0:
        raise NumericalError("every ensemble member was excluded", stage="energy")

    C_obs = max(c1 / T + kappa, obs_ratio)
    C = C_obs / kappa
    constants = DecayConstants(c1=c1, C_obs=C_obs, C=C, T=T, windows=windows, excluded=excluded)
    logger.info(
        "decay constants: c1=%.4g C=%.4g gamma=%.4g nu=%.4g (%d windows)",
        c1, C, constants.gamma, constants.nu, windows,
    )
    return constants


@dataclass(frozen=True)
class EnvelopeCheck:
    max_ratio: float
    passed: bool


def energy_envelope_check(
    traj: Trajectory, constants: DecayConstants, rtol: float = 1e-9
) -> EnvelopeCheck:
    """``E(t) <= E(0) exp(-nu t) / gamma`` at every snapshot above the roundoff floor."""
    e = energy_series(traj)
    if e[0] <= 0.0:
        return EnvelopeCheck(max_ratio=0.0, passed=True)
    t = traj.times - traj.t0
    envelope = e[0] * np.exp(-constants.nu * t) / constants.gamma
    mask = e > ENERGY_FLOOR * e[0]
    ratio = float(np.max(e[mask] / envelope[mask]))
    return EnvelopeCheck(max_ratio=ratio, passed=ratio <= 1.0 + rtol)


def geometric_decay_check(
    traj: Trajectory, constants: DecayConstants, windows: int, rtol: float = 1e-9
) -> bool:
    """``E(jT) <= gamma^j E(0)`` for ``j = 1..windows`` (above the roundoff floor)."""
    e = energy_series(traj)
    for j in range(1, windows + 1):
        t = traj.t0 + j * constants.T
        if t > traj.t_end + 1e-9:
            break
        ej = e[traj.index_of(t)]
        if ej <= ENERGY_FLOOR * e[0]:
            break
        if ej > constants.gamma**j * e[0] * (1.0 + rtol):
            return False
    return True
