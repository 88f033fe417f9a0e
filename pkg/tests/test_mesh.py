import math

import numpy as np
import pytest

from kawlab.core.mesh import (
    Field,
    boundary_traces,
    build_grid,
    l2_inner,
    l2_norm,
    sobolev_norm,
)
from kawlab.exceptions import GridError, ParameterError


def test_grid_spacing_and_nodes():
    grid = build_grid(8)
    assert grid.h == pytest.approx(1.0 / 9.0)
    assert grid.nodes[0] == pytest.approx(grid.h)
    assert grid.nodes[-1] == pytest.approx(8.0 / 9.0)
    assert len(grid.full_nodes) == 10


@pytest.mark.parametrize("n", [7, 0, -3, True, 8.0])
def test_grid_rejects_bad_node_counts(n):
    with pytest.raises(GridError):
        build_grid(n)


def test_field_shape_and_finiteness():
    grid = build_grid(10)
    with pytest.raises(GridError):
        Field(grid, np.zeros(11))
    with pytest.raises(ParameterError):
        Field(grid, np.full(10, np.nan))


def test_field_is_read_only():
    u = Field.zeros(build_grid(10))
    with pytest.raises(ValueError):
        u.values[0] = 1.0


def test_mismatched_grids_are_rejected():
    with pytest.raises(GridError):
        l2_inner(Field.zeros(build_grid(10)), Field.zeros(build_grid(12)))


def test_l2_norm_of_sine():
    grid = build_grid(199)
    u = Field.from_function(grid, lambda x: np.sin(np.pi * x))
    assert l2_norm(u) == pytest.approx(math.sqrt(0.5), abs=1e-4)
    assert l2_inner(u, u) == pytest.approx(0.5, abs=1e-12)


def test_traces_exact_on_quintic():
    grid = build_grid(40)
    u = Field.from_function(grid, lambda x: x**2 * (1.0 - x) ** 3)
    tr = boundary_traces(u)
    assert tr.ux0 == pytest.approx(0.0, abs=1e-9)
    assert tr.ux1 == pytest.approx(0.0, abs=1e-9)
    assert tr.uxx0 == pytest.approx(2.0, abs=1e-8)
    assert tr.uxx1 == pytest.approx(0.0, abs=1e-8)


def _trace_errors(n):
    grid = build_grid(n)
    u = Field.from_function(grid, lambda x: x * np.exp(x))
    tr = boundary_traces(u, 0.0, math.e)
    return abs(tr.ux0 - 1.0), abs(tr.uxx0 - 2.0)


def test_trace_orders():
    d1_coarse, d2_coarse = _trace_errors(39)
    d1_fine, d2_fine = _trace_errors(79)
    assert math.log2(d1_coarse / d1_fine) > 4.5
    assert math.log2(d2_coarse / d2_fine) > 3.5


def test_sobolev_order_must_be_supported():
    with pytest.raises(ParameterError):
        sobolev_norm(Field.zeros(build_grid(10)), 3)


def test_sobolev_norms_are_ordered():
    grid = build_grid(64)
    u = Field.from_function(grid, lambda x: np.sin(np.pi * x))
    l2, h1, h2 = (sobolev_norm(u, k) for k in (0, 1, 2))
    assert l2 < h1 < h2
    # |sin|^2 + |pi cos|^2 + |pi^2 sin|^2 over [0, 1]
    assert h2 == pytest.approx(math.sqrt(0.5 * (1 + math.pi**2 + math.pi**4)), rel=1e-2)


@pytest.mark.parametrize("n", [15, 40])
def test_l2_inner_orthogonality_and_symmetry(n):
    grid = build_grid(n)
    modes = [Field.from_function(grid, lambda x, k=k: np.sin(k * np.pi * x)) for k in (1, 2, 3)]
    for i, u in enumerate(modes):
        for j, v in enumerate(modes):
            expected = 0.5 if i == j else 0.0
            assert l2_inner(u, v) == pytest.approx(expected, abs=1e-12)
            assert l2_inner(u, v) == pytest.approx(l2_inner(v, u), abs=1e-15)
    rng = np.random.default_rng(4)
    a = Field(grid, rng.standard_normal(n))
    b = Field(grid, rng.standard_normal(n))
    assert l2_inner(a, b) == pytest.approx(l2_inner(b, a), rel=1e-15)
    assert l2_inner(a + b, a) == pytest.approx(l2_inner(a, a) + l2_inner(b, a), rel=1e-12)
