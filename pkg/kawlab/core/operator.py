"""
Discrete damped Kawahara generator ``A u = -u_xxx + u_xxxxx`` on the interior mesh.

Boundary conditions: u(0) = g0, u(1) = 0, u_x(0) = q0, u_x(1) = q1 and
u_xx(1) = alpha * u_xx(0) + kappa. Homogeneous data (all zero) define the
semigroup generator; inhomogeneous data serve the forced and lifted systems.

The closure uses ghost nodes, every relation exact for quadratics:

* ``u_{-1} = 3/2 u_0 - u_1 + u_2/2 - h q0`` (slope at x = 0),
* ``u_{-2}`` is the cubic extrapolation from ``u_0, u_1, u_2, q0`` with an
  ``h^2`` correction that keeps the boundary form definite,
* ``u_{n+2} = u_n + 2h q1`` (slope at x = 1),
* ``u_{n+3}`` ties the wide second difference at x = 1 to alpha times the
  one-sided curvature ``K = 8u_1 - u_2 - 7u_0 - 6h q0`` (about ``2h^2 u_xx(0)``).

With homogeneous data, writing ``a = u_1``, ``b = u_2``, ``p = u_n`` and

    z0 = (8a - b) / (2h^2),   z1 = 2p / h^2,   eta = (4a - b) / h^2,

every grid vector satisfies

    (A u, u) = (alpha^2 - 1)/2 z0^2 - (z1 - alpha z0)^2 / 2
               + h^2 (z0^2 - z1^2) / 8 - (1/8 + h^2/32) eta^2,

the discrete counterpart of ``(A u, u) = (alpha^2 - 1)/2 u_xx(0)^2``. ``z0`` is
a second-order curvature and ``eta`` is O(h) for smooth fields, so the form
converges at second order. The matrix is dissipative as soon as
``h^4 <= 16 (1 - alpha^2)``.

The matrix is stored as a 7-diagonal band (scipy.linalg.solve_banded layout)
plus one rank-one coupling ``u_vec v_vec^T`` from the curvature condition.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from kawlab.config import get_settings
from kawlab.core.mesh import Field, Grid, boundary_traces, l2_inner, sobolev_norm
from kawlab.exceptions import NumericalError, ParameterError

logger = logging.getLogger(__name__)

BANDS = 3

# Central stencils at offsets -2..2 and -3..3, without their 1/h^3 and 1/h^5 factors
D3_STENCIL = np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / 2.0
D5_STENCIL = np.array([-1.0, 4.0, -5.0, 0.0, 5.0, -4.0, 1.0]) / 2.0


@dataclass(frozen=True)
class DampingParam:
    alpha: float

    def __post_init__(self) -> None:
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or abs(alpha) >= 1.0:
            raise ParameterError(f"damping parameter must satisfy |alpha| < 1, got {self.alpha}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def dissipation(self) -> float:
        """``(1 - alpha^2) / 2``, the boundary dissipation coefficient."""
        return 0.5 * (1.0 - self.alpha**2)


@dataclass(frozen=True)
class BoundaryData:
    g0: float = 0.0
    q0: float = 0.0
    q1: float = 0.0
    kappa: float = 0.0

    @property
    def is_homogeneous(self) -> bool:
        return self.g0 == 0.0 and self.q0 == 0.0 and self.q1 == 0.0 and self.kappa == 0.0

    def scaled(self, factor: float) -> BoundaryData:
        return BoundaryData(self.g0 * factor, self.q0 * factor, self.q1 * factor, self.kappa * factor)


HOMOGENEOUS = BoundaryData()


def interior_stencil(h: float) -> np.ndarray:
    """Coefficients of ``-D3 + D5`` at offsets -3..3."""
    d3 = np.pad(D3_STENCIL, 1) / h**3
    d5 = D5_STENCIL / h**5
    return -d3 + d5


def extend_with_ghosts(values: np.ndarray, h: float, alpha: float, data: BoundaryData) -> np.ndarray:
    """Return ``w`` with ``w[j + 2] = u_j`` for ``j = -2..n+3``."""
    n = values.shape[-1]
    eps = h**2
    w = np.empty(n + 6)
    w[3 : n + 3] = values
    w[2] = data.g0
    w[n + 3] = 0.0
    w[1] = 1.5 * w[2] - w[3] + 0.5 * w[4] - h * data.q0
    w[0] = (
        (16.0 - 4.0 * eps) * w[3]
        - (3.0 - eps) * w[4]
        - (12.0 - 3.0 * eps) * w[2]
        - (12.0 - 2.0 * eps) * h * data.q0
    )
    w[n + 4] = w[n + 2] + 2.0 * h * data.q1
    w[n + 5] = 2.0 * w[n + 3] - w[n + 1] + 2.0 * alpha * curvature_sum(w[2], w[3], w[4], h * data.q0)
    w[n + 5] += 4.0 * h**2 * data.kappa
    return w


def curvature_sum(u0, u1, u2, slope):
    """``8u_1 - u_2 - 7u_0 - 6h u_x(0)``, which is ``2h^2 u_xx(0)`` for quadratics."""
    return 8.0 * u1 - u2 - 7.0 * u0 - 6.0 * slope


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Banded matrix plus rank-one coupling. Immutable once assembled."""

    grid: Grid
    damping: DampingParam
    band: np.ndarray
    coupling_left: np.ndarray
    coupling_right: np.ndarray
    adjoint: bool = False
    stencil: np.ndarray = field(repr=False, default=None)

    @property
    def alpha(self) -> float:
        return self.damping.alpha

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def h(self) -> float:
        return self.grid.h

    # ------------------------------------------------------------------
    # Application
    # ------------------------------------------------------------------

    def apply(self, u: Field | np.ndarray, data: BoundaryData = HOMOGENEOUS) -> np.ndarray:
        values = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
        if self.adjoint:
            if not data.is_homogeneous:
                raise ParameterError("the adjoint only acts on homogeneous data", stage="operator")
            return self._apply_primal(values[::-1], HOMOGENEOUS)[::-1]
        return self._apply_primal(values, data)

    def _apply_primal(self, values: np.ndarray, data: BoundaryData) -> np.ndarray:
        n = self.n
        w = extend_with_ghosts(values, self.h, self.alpha, data)
        out = np.zeros(n)
        for offset, coeff in zip(range(-3, 4), self.stencil):
            if coeff != 0.0:
                out += coeff * w[offset + 3 : offset + n + 3]
        return out

    def boundary_vector(self, data: BoundaryData) -> np.ndarray:
        """Affine part of the action: ``apply(0, data)``."""
        return self._apply_primal(np.zeros(self.n), data)

    def matvec(self, values: np.ndarray) -> np.ndarray:
        """Homogeneous action through the stored band and coupling."""
        n = self.n
        out = np.zeros(n)
        for row in range(2 * BANDS + 1):
            k = BANDS - row
            if k >= 0:
                out[: n - k] += self.band[row, k:] * values[k:]
            else:
                out[-k:] += self.band[row, : n + k] * values[: n + k]
        out += self.coupling_left * float(self.coupling_right @ values)
        return out

    def to_dense(self) -> np.ndarray:
        n = self.n
        dense = np.zeros((n, n))
        for row in range(2 * BANDS + 1):
            k = BANDS - row
            if k >= 0:
                idx = np.arange(n - k)
                dense[idx, idx + k] = self.band[row, k:]
            else:
                idx = np.arange(-k, n)
                dense[idx, idx + k] = self.band[row, : n + k]
        return dense + np.outer(self.coupling_left, self.coupling_right)

    # ------------------------------------------------------------------
    # Solves
    # ------------------------------------------------------------------

    def shifted_solver(self, shift: float) -> ShiftedSolver:
        return ShiftedSolver(self, float(shift))

    def solve_shifted(self, rhs: np.ndarray, shift: float) -> np.ndarray:
        """Solve ``(I - shift*A) x = rhs`` for the homogeneous matrix."""
        return self.shifted_solver(shift).solve(rhs)

    # ------------------------------------------------------------------
    # Boundary curvatures
    # ------------------------------------------------------------------

    def scheme_curvatures(self, values: np.ndarray, data: BoundaryData = HOMOGENEOUS) -> tuple:
        """Boundary curvatures ``(z0, z1)`` the energy identity is written in.

        ``z0`` is the one-sided curvature at the damped end used by the
        coupling, ``z1`` the compact second difference at the far end.
        Accepts a single vector or a (snapshots, n) array; ``data.g0`` may be
        an array of per-snapshot Dirichlet values.
        """
        values = np.asarray(values, dtype=float)
        h = self.h
        first, second, last = values[..., 0], values[..., 1], values[..., -1]
        g0 = np.asarray(data.g0, dtype=float)
        if self.adjoint:
            first, second, last = last, values[..., -2], first
        z0 = curvature_sum(g0, first, second, h * data.q0) / (2.0 * h**2)
        z1 = 2.0 * (last + h * data.q1) / h**2
        return z0, z1

    def energy_form(self, values: np.ndarray) -> float:
        """``(A u, u)`` for homogeneous data from the boundary curvatures alone."""
        values = np.asarray(values, dtype=float)
        h, alpha = self.h, self.alpha
        z0, z1 = self.scheme_curvatures(values)
        if self.adjoint:
            values = values[::-1]
        eta = (4.0 * values[0] - values[1]) / h**2
        return float(
            0.5 * (alpha**2 - 1.0) * z0**2
            - 0.5 * (z1 - alpha * z0) ** 2
            + h**2 * (z0**2 - z1**2) / 8.0
            - (0.125 + h**2 / 32.0) * eta**2
        )


class ShiftedSolver:
    """Factor-free solver for ``(I - shift*A) x = b`` via Sherman-Morrison."""

    def __init__(self, op: DiscreteOperator, shift: float):
        self.op = op
        self.shift = shift
        band = -shift * op.band
        band[BANDS, :] += 1.0
        self._band = band
        left = -shift * op.coupling_left
        self._right = op.coupling_right
        self._z = scipy.linalg.solve_banded((BANDS, BANDS), band, left, check_finite=False)
        denom = 1.0 + float(self._right @ self._z)
        if not np.isfinite(denom) or abs(denom) < 1e-12:
            raise NumericalError(
                f"rank-one correction is singular (denominator {denom:.3e}) for shift {shift:.3e}",
                stage="operator",
            )
        self._denom = denom

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        try:
            x = scipy.linalg.solve_banded((BANDS, BANDS), self._band, rhs, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"banded solve failed: {exc}", stage="operator") from exc
        return x - self._z * (float(self._right @ x) / self._denom)


def _add(band: np.ndarray, i: int, j: int, value: float) -> None:
    band[BANDS + i - j, j] += value


def build_operator(grid: Grid, alpha: DampingParam | float, *, adjoint: bool = False) -> DiscreteOperator:
    """Assemble the homogeneous damped Kawahara matrix on ``grid``."""
    damping = alpha if isinstance(alpha, DampingParam) else DampingParam(alpha)
    n, h = grid.n, grid.h
    eps = h**2
    stencil = interior_stencil(h)
    a_m3, a_m2, a_2, a_3 = stencil[0], stencil[1], stencil[5], stencil[6]

    band = np.zeros((2 * BANDS + 1, n))
    for offset, coeff in zip(range(-3, 4), stencil):
        band[BANDS - offset, :] = coeff

    # Ghost corrections near x = 0
    _add(band, 0, 0, -a_m2 + (16.0 - 4.0 * eps) * a_m3)
    _add(band, 0, 1, 0.5 * a_m2 - (3.0 - eps) * a_m3)
    _add(band, 1, 0, -a_m3)
    _add(band, 1, 1, 0.5 * a_m3)
    # near x = 1
    _add(band, n - 1, n - 1, a_2)
    _add(band, n - 2, n - 1, a_3)
    _add(band, n - 1, n - 2, -a_3)

    coupling_left = np.zeros(n)
    coupling_right = np.zeros(n)
    coupling_left[n - 1] = 2.0 * damping.alpha * a_3
    coupling_right[0] = 8.0
    coupling_right[1] = -1.0

    if h**4 > 16.0 * (1.0 - damping.alpha**2):
        logger.warning(
            "grid too coarse for alpha=%.4f: discrete operator is not dissipative (n=%d)",
            damping.alpha, n,
        )

    if adjoint:
        # Adjoint is the node-reversed matrix
        band = band[::-1, ::-1].copy()
        coupling_left, coupling_right = coupling_left[::-1].copy(), coupling_right[::-1].copy()

    band.flags.writeable = False
    coupling_left.flags.writeable = False
    coupling_right.flags.writeable = False
    return DiscreteOperator(
        grid=grid,
        damping=damping,
        band=band,
        coupling_left=coupling_left,
        coupling_right=coupling_right,
        adjoint=adjoint,
        stencil=stencil,
    )


# ----------------------------------------------------------------------
# Diagnostics
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DissipativityReport:
    lhs: float
    rhs: float
    gap: float
    domain_residual: float
    domain_ok: bool


def dissipativity_report(op: DiscreteOperator, u: Field, domain_tol: float = 1e-6) -> DissipativityReport:
    """Compare ``(A u, u)`` with ``(alpha^2 - 1)/2 * u_xx(0)^2`` (x = 1 for the adjoint).

    The domain residual measures how far the sampled field is from the
    operator's boundary conditions, relative to its H2 norm.
    """
    if u.grid != op.grid:
        raise ParameterError("field and operator use different grids", stage="operator")
    lhs = l2_inner(Field(u.grid, op.apply(u)), u)
    tr = boundary_traces(u)
    alpha = op.alpha
    if op.adjoint:
        rhs = 0.5 * (alpha**2 - 1.0) * tr.uxx1**2
        curvature = tr.uxx0 - alpha * tr.uxx1
    else:
        rhs = 0.5 * (alpha**2 - 1.0) * tr.uxx0**2
        curvature = tr.uxx1 - alpha * tr.uxx0
    scale = max(sobolev_norm(u, 2), np.finfo(float).tiny)
    residual = max(abs(tr.ux0), abs(tr.ux1), abs(curvature)) / scale
    return DissipativityReport(
        lhs=lhs,
        rhs=rhs,
        gap=lhs - rhs,
        domain_residual=residual,
        domain_ok=residual < domain_tol,
    )


def adjoint_consistency(op: DiscreteOperator, u: Field, v: Field) -> float:
    """``(A u, v) - (u, A* v)``, a boundary bilinear form of order ``1/h^4``.

    For the primal operator it equals ``D / h^4`` with

        D = (2eps - 8) u_1 v_1 + (2 - eps/4) u_2 v_1 + u_1 v_2 - u_2 v_2 / 4
            + (8 - 2eps) u_n v_n - u_{n-1} v_n - (2 - eps/4) u_n v_{n-1}
            + u_{n-1} v_{n-1} / 4 + alpha (u_1 v_{n-1} - u_2 v_n),

    ``eps = h^2``. It vanishes when both fields are O(h^3) at the boundary.
    """
    adj = build_operator(op.grid, op.damping, adjoint=not op.adjoint)
    return l2_inner(Field(u.grid, op.apply(u)), v) - l2_inner(u, Field(v.grid, adj.apply(v)))


def spectrum(op: DiscreteOperator) -> np.ndarray:
    """Eigenvalues of the dense matrix, sorted by decreasing real part."""
    limit = get_settings().dense_limit
    if op.n > limit:
        raise ParameterError(
            f"spectrum needs a dense matrix; n={op.n} exceeds the limit of {limit}",
            stage="operator",
        )
    try:
        eig = scipy.linalg.eigvals(op.to_dense())
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}", stage="operator") from exc
    return eig[np.argsort(-eig.real, kind="stable")]


def spectral_abscissa(op: DiscreteOperator) -> float:
    return float(spectrum(op)[0].real)


def dump(op: DiscreteOperator, path: str | Path) -> Path:
    """Write the dense matrix row-major, one row per line, in ``%.16e``."""
    limit = get_settings().dense_limit
    if op.n > limit:
        raise ParameterError(
            f"operator dump needs a dense matrix; n={op.n} exceeds the limit of {limit}",
            stage="operator",
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, op.to_dense(), fmt="%.16e")
    logger.info("wrote %dx%d operator matrix to %s", op.n, op.n, path)
    return path
