"""
Boundary forcing signals, the quadratic lifting profile and the coefficient
fields of the lifted equation.

Every signal is a finite sum of sines ``a sin(w t + p)``:

* ``periodic``: harmonics ``k`` of a base period ``T`` (``w = 2 pi k / T``),
* ``quasi_periodic``: ``Phi(wbar t + abar)`` with Phi a trigonometric polynomial on the
  torus (integer wavevectors), so ``w = k.wbar`` and ``p = k.abar + phase``,
* ``almost_periodic``: arbitrary real frequencies,
* ``zero``: no modes at all.

The lifting ``A(x) = c2 x^2 + c1 x - 1`` with ``c2 = (alpha-1)/(alpha+1)`` and
``c1 = 2/(alpha+1)`` turns ``u`` into ``y = u + A(x) phi(t)``, which has zero
Dirichlet data and inherits slope and curvature data proportional to phi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from kawlab.core.mesh import Field, Grid, boundary_traces
from kawlab.core.operator import BoundaryData
from kawlab.exceptions import ParameterError

logger = logging.getLogger(__name__)

VARIANTS = ("zero", "periodic", "quasi_periodic", "almost_periodic")


@dataclass(frozen=True)
class Mode:
    amplitude: float
    frequency: float
    phase: float = 0.0


@dataclass(frozen=True)
class ForcingSignal:
    """A boundary signal; ``modes`` is the normalized sine sum.

    ``spec`` keeps the user-facing description (variant parameters) so the
    signal can be echoed into reports and re-phased for torus experiments.
    """

    variant: str
    modes: tuple[Mode, ...]
    spec: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown forcing variant {self.variant!r}", key="forcing.variant")
        if self.variant == "zero" and self.modes:
            raise ParameterError("the zero signal carries no modes", key="forcing.modes")
        for mode in self.modes:
            if not all(math.isfinite(v) for v in (mode.amplitude, mode.frequency, mode.phase)):
                raise ParameterError("forcing modes must be finite", key="forcing")

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def zero(cls) -> ForcingSignal:
        return cls("zero", (), {"variant": "zero"})

    @classmethod
    def periodic(cls, period: float, harmonics: list[tuple[int, float, float]]) -> ForcingSignal:
        """``harmonics`` is a list of ``(k, amplitude, phase)``."""
        if not period > 0.0:
            raise ParameterError(f"period must be positive, got {period}", key="forcing.period")
        modes = tuple(Mode(a, 2.0 * math.pi * k / period, p) for k, a, p in harmonics)
        spec = {"variant": "periodic", "period": period, "harmonics": [list(hm) for hm in harmonics]}
        return cls("periodic", modes, spec)

    @classmethod
    def quasi(
        cls,
        frequencies: list[float],
        phases: list[float],
        terms: list[tuple[list[int], float, float]],
    ) -> ForcingSignal:
        """``terms`` is a list of ``(wavevector, amplitude, phase)`` on the torus."""
        wbar = np.asarray(frequencies, dtype=float)
        abar = np.asarray(phases, dtype=float)
        if wbar.ndim != 1 or wbar.shape != abar.shape or wbar.size == 0:
            raise ParameterError("frequency and phase vectors must match", key="forcing.frequencies")
        modes = []
        for wavevector, amplitude, phase in terms:
            k = np.asarray(wavevector)
            if k.shape != wbar.shape or not np.all(np.equal(np.mod(k, 1), 0)):
                raise ParameterError(
                    f"wavevector {wavevector} must have {wbar.size} integer entries",
                    key="forcing.terms",
                )
            modes.append(Mode(amplitude, float(k @ wbar), float(k @ abar) + phase))
        spec = {
            "variant": "quasi_periodic",
            "frequencies": wbar.tolist(),
            "phases": abar.tolist(),
            "terms": [[list(map(int, k)), a, p] for k, a, p in terms],
        }
        return cls("quasi_periodic", tuple(modes), spec)

    @classmethod
    def almost(cls, modes: list[tuple[float, float, float]]) -> ForcingSignal:
        """``modes`` is a list of ``(amplitude, frequency, phase)``."""
        spec = {"variant": "almost_periodic", "modes": [list(m) for m in modes]}
        return cls("almost_periodic", tuple(Mode(a, w, p) for a, w, p in modes), spec)

    def with_torus_phase(self, phases: list[float]) -> ForcingSignal:
        """Same torus function and frequencies, new initial phase vector."""
        if self.variant != "quasi_periodic":
            raise ParameterError("only quasi-periodic signals carry a torus phase")
        terms = [(k, a, p) for k, a, p in self.spec["terms"]]
        rephased = ForcingSignal.quasi(self.spec["frequencies"], phases, terms)
        scale = self.spec.get("scale", 1.0)
        return rephased if scale == 1.0 else rephased.scaled(scale)

    def scaled(self, factor: float) -> ForcingSignal:
        modes = tuple(Mode(m.amplitude * factor, m.frequency, m.phase) for m in self.modes)
        spec = dict(self.spec, scale=self.spec.get("scale", 1.0) * factor)
        return ForcingSignal(self.variant, modes, spec)

    def shifted(self, sigma: float) -> ForcingSignal:
        """``t -> phi(t + sigma)``."""
        modes = tuple(Mode(m.amplitude, m.frequency, m.phase + m.frequency * sigma) for m in self.modes)
        spec = dict(self.spec, shift=self.spec.get("shift", 0.0) + sigma)
        return ForcingSignal(self.variant, modes, spec)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    @property
    def period(self) -> float | None:
        return self.spec.get("period") if self.variant == "periodic" else None

    @property
    def is_zero(self) -> bool:
        return all(m.amplitude == 0.0 for m in self.modes)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m in self.modes:
            out = out + m.amplitude * np.sin(m.frequency * t + m.phase)
        return out if out.ndim else float(out)

    def dphi(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m in self.modes:
            out = out + m.amplitude * m.frequency * np.cos(m.frequency * t + m.phase)
        return out if out.ndim else float(out)

    def describe(self) -> dict:
        return dict(self.spec)


@dataclass(frozen=True)
class ForcingValue:
    phi: float
    dphi: float


def eval_forcing(signal: ForcingSignal, t: float) -> ForcingValue:
    return ForcingValue(signal.phi(t), signal.dphi(t))


def c1_norm(signal: ForcingSignal) -> float:
    """``max(sum |a|, sum |a w|)``, which bounds both ``sup|phi|`` and ``sup|phi'|``."""
    if not signal.modes:
        return 0.0
    amp = sum(abs(m.amplitude) for m in signal.modes)
    slope = sum(abs(m.amplitude * m.frequency) for m in signal.modes)
    return max(amp, slope)


# ----------------------------------------------------------------------
# Lifting
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LiftingMap:
    alpha: float
    profile: Polynomial

    @property
    def slope(self) -> Polynomial:
        return self.profile.deriv()

    @property
    def curvature(self) -> float:
        """``A''``, constant for the quadratic profile."""
        return float(self.profile.deriv(2).coef[0])

    def boundary_data(self, phi: float) -> BoundaryData:
        """Boundary data satisfied by ``y = u + A(x) phi`` when u has Dirichlet value phi."""
        a = self.alpha
        slope = self.slope
        return BoundaryData(
            g0=0.0,
            q0=float(slope(0.0)) * phi,
            q1=float(slope(1.0)) * phi,
            kappa=(1.0 - a) * self.curvature * phi,
        )


def lifting_map(alpha: float) -> LiftingMap:
    if abs(alpha) >= 1.0:
        raise ParameterError(f"damping parameter must satisfy |alpha| < 1, got {alpha}")
    c2 = (alpha - 1.0) / (alpha + 1.0)
    c1 = 2.0 / (alpha + 1.0)
    return LiftingMap(alpha=float(alpha), profile=Polynomial([-1.0, c1, c2]))


@dataclass(frozen=True)
class LiftingValues:
    A: np.ndarray
    Aprime: np.ndarray
    Adoubleprime: np.ndarray


def lifting_values(m: LiftingMap, x) -> LiftingValues:
    """``A``, ``A'`` and ``A''`` at x, which must lie in [0, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ParameterError("lifting is only defined on [0, 1]")
    return LiftingValues(
        A=m.profile(x),
        Aprime=m.slope(x),
        Adoubleprime=np.full_like(x, m.curvature),
    )


def transform_u_to_y(u: Field, m: LiftingMap, phi: float) -> Field:
    return Field(u.grid, u.values + m.profile(u.grid.nodes) * phi)


def transform_y_to_u(y: Field, m: LiftingMap, phi: float) -> Field:
    return Field(y.grid, y.values - m.profile(y.grid.nodes) * phi)


@dataclass(frozen=True)
class LiftedBoundaryCheck:
    slope0_residual: float
    slope1_residual: float
    curvature_jump: float
    curvature_jump_expected: float

    @property
    def curvature_residual(self) -> float:
        return self.curvature_jump - self.curvature_jump_expected

    @property
    def max_residual(self) -> float:
        return max(abs(self.slope0_residual), abs(self.slope1_residual), abs(self.curvature_residual))


def verify_y_boundary(y: Field, m: LiftingMap, phi: float) -> LiftedBoundaryCheck:
    """Residuals of the lifted boundary conditions, from one-sided traces of y.

    ``y(0) = y(1) = 0`` holds by construction of :class:`Field`.
    """
    tr = boundary_traces(y)
    data = m.boundary_data(phi)
    a = m.alpha
    return LiftedBoundaryCheck(
        slope0_residual=tr.ux0 - data.q0,
        slope1_residual=tr.ux1 - data.q1,
        curvature_jump=tr.uxx1 - a * tr.uxx0,
        curvature_jump_expected=data.kappa,
    )


# ----------------------------------------------------------------------
# Coefficients of the lifted equation
# ----------------------------------------------------------------------


def _h2_gram(polys: list[Polynomial]) -> np.ndarray:
    """Exact H2 Gram matrix on [0, 1] of a list of polynomials."""
    size = len(polys)
    gram = np.zeros((size, size))
    for i in range(size):
        for j in range(i, size):
            total = 0.0
            for order in range(3):
                prod = (polys[i].deriv(order) * polys[j].deriv(order)).integ()
                total += prod(1.0) - prod(0.0)
            gram[i, j] = gram[j, i] = total
    return gram


@dataclass(frozen=True, eq=False)
class CoefficientFields:
    """``a = -A phi``, ``b = -A' phi`` and ``f = A phi' - A A' phi^2`` of the lifted equation.

    ``alternate_f`` adds ``+A' phi`` to f, the other sign convention seen for
    the third-order term.
    """

    lifting: LiftingMap
    forcing: ForcingSignal
    alternate_f: bool = False

    def a(self, x, t):
        return -lifting_values(self.lifting, x).A * self.forcing.phi(t)

    def b(self, x, t):
        return -lifting_values(self.lifting, x).Aprime * self.forcing.phi(t)

    def f(self, x, t):
        return _assemble_f(lifting_values(self.lifting, x), eval_forcing(self.forcing, t), self.alternate_f)

    def on_grid(self, grid: Grid) -> GridCoefficients:
        return GridCoefficients(self, grid)

    # Spatial profiles and their exact H2 norms

    def _profiles(self) -> list[Polynomial]:
        prof, slope = self.lifting.profile, self.lifting.slope
        return [prof, slope, prof * slope]

    def profile_gram(self) -> np.ndarray:
        return _h2_gram(self._profiles())


def _assemble_f(lift: LiftingValues, value: ForcingValue, alternate: bool):
    out = lift.A * value.dphi - lift.A * lift.Aprime * value.phi**2
    if alternate:
        out = out + lift.Aprime * value.phi
    return out


class GridCoefficients:
    """Coefficient fields sampled on a grid, evaluated per time level."""

    def __init__(self, coeffs: CoefficientFields, grid: Grid):
        self.coeffs = coeffs
        self.grid = grid
        self.lift = lifting_values(coeffs.lifting, grid.nodes)

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        value = eval_forcing(self.coeffs.forcing, t)
        a = -self.lift.A * value.phi
        b = -self.lift.Aprime * value.phi
        return a, b, _assemble_f(self.lift, value, self.coeffs.alternate_f)


@dataclass(frozen=True)
class CoefficientNorms:
    a: float
    b: float
    f: float


def coefficient_norms(coeffs: CoefficientFields, times: np.ndarray) -> CoefficientNorms:
    """``sup_t`` of the H2 norms of a, b and f over the sampled ``times``."""
    gram = coeffs.profile_gram()
    phi = np.asarray(coeffs.forcing.phi(times))
    dphi = np.asarray(coeffs.forcing.dphi(times))
    a_norm = math.sqrt(gram[0, 0]) * float(np.max(np.abs(phi), initial=0.0))
    b_norm = math.sqrt(gram[1, 1]) * float(np.max(np.abs(phi), initial=0.0))
    f_norm = _f_norm(gram, dphi, phi, coeffs.alternate_f)
    return CoefficientNorms(a=a_norm, b=b_norm, f=f_norm)


def shift_norms(coeffs: CoefficientFields, sigma: float, times: np.ndarray) -> CoefficientNorms:
    """``sup_t`` of the H2 norms of ``c(t + sigma) - c(t)`` for c = a, b, f."""
    gram = coeffs.profile_gram()
    forcing = coeffs.forcing
    dphi = np.asarray(forcing.phi(times + sigma)) - np.asarray(forcing.phi(times))
    ddphi = np.asarray(forcing.dphi(times + sigma)) - np.asarray(forcing.dphi(times))
    dsq = np.asarray(forcing.phi(times + sigma)) ** 2 - np.asarray(forcing.phi(times)) ** 2
    a_norm = math.sqrt(gram[0, 0]) * float(np.max(np.abs(dphi), initial=0.0))
    b_norm = math.sqrt(gram[1, 1]) * float(np.max(np.abs(dphi), initial=0.0))
    # f(t+s) - f(t) = A (dphi shift) - A A' (phi^2 shift) [+ A' (phi shift)]
    c = np.stack([ddphi, dphi if coeffs.alternate_f else np.zeros_like(dphi), -dsq])
    values = np.clip(np.einsum("it,ij,jt->t", c, gram, c), 0.0, None)
    f_norm = float(np.sqrt(np.max(values, initial=0.0)))
    return CoefficientNorms(a=a_norm, b=b_norm, f=f_norm)


def _f_norm(gram: np.ndarray, dphi: np.ndarray, phi: np.ndarray, alternate: bool) -> float:
    c = np.stack([dphi, phi if alternate else np.zeros_like(phi), -(phi**2)])
    values = np.einsum("it,ij,jt->t", c, gram, c)
    return float(np.sqrt(np.max(np.clip(values, 0.0, None), initial=0.0)))


def c1_budget_check(signal: ForcingSignal, epsilon: float | None) -> bool:
    """True when the signal fits the declared small-data budget (or none is declared)."""
    if epsilon is None:
        return True
    norm = c1_norm(signal)
    if norm > epsilon:
        logger.warning("forcing norm %.3e exceeds the small-data budget %.3e", norm, epsilon)
        return False
    return True
