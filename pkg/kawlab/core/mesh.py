"""
Uniform interior mesh on [0, 1], grid functions, discrete norms and boundary traces.

A grid with ``n`` interior nodes has spacing ``h = 1/(n+1)`` and nodes
``x_i = i*h`` for ``i = 1..n``. Boundary values are never stored in a
:class:`Field`; operations that need them take the two Dirichlet values
explicitly and work on the extended array ``[u(0), u_1, ..., u_n, u(1)]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from kawlab.exceptions import GridError, ParameterError

MIN_NODES = 8

# One-sided weights, boundary node first. Both stencils use six points:
# fifth order for the first derivative, fourth order for the second.
_D1_WEIGHTS = np.array([-137.0, 300.0, -300.0, 200.0, -75.0, 12.0]) / 60.0
_D2_WEIGHTS = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0


@dataclass(frozen=True, eq=False)
class Grid:
    n: int
    h: float
    nodes: np.ndarray

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("Grid", self.n))

    def __repr__(self) -> str:
        return f"Grid(n={self.n}, h={self.h:.6g})"

    @property
    def full_nodes(self) -> np.ndarray:
        """Nodes including both boundary points."""
        return np.linspace(0.0, 1.0, self.n + 2)


def build_grid(n: int) -> Grid:
    """Build the uniform grid with ``n`` interior nodes (``n >= 8``)."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise GridError(f"node count must be an integer, got {n!r}", stage="mesh")
    n = int(n)
    if n < MIN_NODES:
        raise GridError(
            f"at least {MIN_NODES} interior nodes are required, got {n}", stage="mesh"
        )
    h = 1.0 / (n + 1)
    nodes = h * np.arange(1, n + 1, dtype=float)
    nodes.flags.writeable = False
    return Grid(n=n, h=h, nodes=nodes)


@dataclass(frozen=True, eq=False)
class Field:
    """Interior values of a grid function. The array is read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (self.grid.n,):
            raise GridError(
                f"field has shape {values.shape}, grid expects ({self.grid.n},)",
                stage="mesh",
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("field contains non-finite values", stage="mesh")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> Field:
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_function(cls, grid: Grid, func) -> Field:
        """Sample ``func`` (vectorized over x) at the interior nodes."""
        return cls(grid, np.broadcast_to(func(grid.nodes), (grid.n,)))

    def extended(self, left: float = 0.0, right: float = 0.0) -> np.ndarray:
        return np.concatenate(([left], self.values, [right]))

    def __add__(self, other: Field) -> Field:
        _require_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: Field) -> Field:
        _require_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> Field:
        return Field(self.grid, self.values * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class BoundaryTraces:
    ux0: float
    ux1: float
    uxx0: float
    uxx1: float


def _require_same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise GridError(
            f"fields live on different grids ({u.grid.n} vs {v.grid.n} nodes)",
            stage="mesh",
        )


def l2_inner(u: Field, v: Field) -> float:
    """Discrete L2 pairing ``h * sum(u_i v_i)`` with zero boundary values."""
    _require_same_grid(u, v)
    return float(u.grid.h * np.dot(u.values, v.values))


def l2_norm(u: Field, dirichlet0: float = 0.0, dirichlet1: float = 0.0) -> float:
    """Trapezoidal L2 norm including the boundary values."""
    return float(sobolev_norms(u.values[None, :], u.grid.h, 0, dirichlet0, dirichlet1)[0])


def _traces_rows(w: np.ndarray, h: float) -> tuple[np.ndarray, ...]:
    """Boundary traces for each row of an extended array (rows = snapshots)."""
    left = w[:, :6]
    right = w[:, ::-1][:, :6]
    ux0 = left @ _D1_WEIGHTS / h
    ux1 = -(right @ _D1_WEIGHTS) / h
    uxx0 = left @ _D2_WEIGHTS / h**2
    uxx1 = right @ _D2_WEIGHTS / h**2
    return ux0, ux1, uxx0, uxx1


def boundary_traces(u: Field, dirichlet0: float = 0.0, dirichlet1: float = 0.0) -> BoundaryTraces:
    """One-sided estimates of u_x and u_xx at both ends."""
    w = u.extended(dirichlet0, dirichlet1)[None, :]
    ux0, ux1, uxx0, uxx1 = _traces_rows(w, u.grid.h)
    return BoundaryTraces(float(ux0[0]), float(ux1[0]), float(uxx0[0]), float(uxx1[0]))


def boundary_traces_many(
    values: np.ndarray, h: float, dirichlet0=0.0, dirichlet1=0.0
) -> tuple[np.ndarray, ...]:
    """Vectorized :func:`boundary_traces` over a (snapshots, n) array.

    ``dirichlet0``/``dirichlet1`` may be scalars or one value per snapshot.
    """
    w = _extend_rows(values, dirichlet0, dirichlet1)
    return _traces_rows(w, h)


def _extend_rows(values: np.ndarray, dirichlet0, dirichlet1) -> np.ndarray:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    m = values.shape[0]
    left = np.broadcast_to(np.asarray(dirichlet0, dtype=float), (m,))[:, None]
    right = np.broadcast_to(np.asarray(dirichlet1, dtype=float), (m,))[:, None]
    return np.hstack([left, values, right])


def sobolev_norms(
    values: np.ndarray, h: float, k: int, dirichlet0=0.0, dirichlet1=0.0
) -> np.ndarray:
    """Discrete H^k norms (k in 0..2) of every row of ``values``.

    Derivatives are central differences at interior nodes and one-sided traces
    at the two ends; integrals use the trapezoidal rule on the full node set.
    """
    if k not in (0, 1, 2):
        raise ParameterError(f"Sobolev order must be 0, 1 or 2, got {k}", stage="mesh")
    w = _extend_rows(values, dirichlet0, dirichlet1)
    total = trapezoid(w**2, dx=h, axis=1)
    if k >= 1:
        ux0, ux1, uxx0, uxx1 = _traces_rows(w, h)
        du = np.empty_like(w)
        du[:, 1:-1] = (w[:, 2:] - w[:, :-2]) / (2.0 * h)
        du[:, 0] = ux0
        du[:, -1] = ux1
        total = total + trapezoid(du**2, dx=h, axis=1)
        if k == 2:
            d2u = np.empty_like(w)
            d2u[:, 1:-1] = (w[:, 2:] - 2.0 * w[:, 1:-1] + w[:, :-2]) / h**2
            d2u[:, 0] = uxx0
            d2u[:, -1] = uxx1
            total = total + trapezoid(d2u**2, dx=h, axis=1)
    return np.sqrt(total)


def sobolev_norm(u: Field, k: int, dirichlet0: float = 0.0, dirichlet1: float = 0.0) -> float:
    """Discrete H^k norm of a single field; k = 0 is the trapezoidal L2 norm."""
    return float(sobolev_norms(u.values[None, :], u.grid.h, k, dirichlet0, dirichlet1)[0])
