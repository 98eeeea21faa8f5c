"""Trapezoid tables: exactness, additivity, convergence order."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifedual.errors import ValidationError
from lifedual.quadrature import (
    UniformGrid,
    nested_trapezoid,
    prefix_trapezoid,
    prefix_value_at,
    trapezoid,
)


def test_grid_nodes_and_step():
    grid = UniformGrid(0.0, 50.0, 100)
    assert grid.step == 0.5
    nodes = grid.nodes
    assert nodes.shape == (101,)
    assert nodes[0] == 0.0 and nodes[-1] == 50.0
    assert np.allclose(np.diff(nodes), 0.5)


def test_grid_rejects_bad_arguments():
    with pytest.raises(ValidationError):
        UniformGrid(0.0, 1.0, 0)
    with pytest.raises(ValidationError):
        UniformGrid(2.0, 1.0, 10)


def test_trapezoid_exact_for_affine_integrands():
    # the rule integrates a + b*t exactly regardless of resolution
    grid = UniformGrid(1.0, 4.0, 3)
    vals = 2.0 + 0.5 * grid.nodes
    exact = 2.0 * 3.0 + 0.25 * (16.0 - 1.0)
    assert trapezoid(vals, grid) == pytest.approx(exact, abs=1e-14)


def test_trapezoid_shape_mismatch():
    grid = UniformGrid(0.0, 1.0, 4)
    with pytest.raises(ValidationError):
        trapezoid(np.ones(4), grid)


def test_trapezoid_second_order_convergence():
    # halving the step shrinks the error by ~4 for a smooth integrand
    exact = 1.0 - np.cos(2.0)
    errors = []
    for n in (40, 80, 160):
        grid = UniformGrid(0.0, 2.0, n)
        errors.append(abs(trapezoid(np.sin(grid.nodes), grid) - exact))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)
    assert errors[1] / errors[2] == pytest.approx(4.0, rel=0.05)


def test_prefix_matches_full_rule_and_starts_at_zero():
    grid = UniformGrid(0.0, 5.0, 17)
    vals = np.exp(-0.3 * grid.nodes)
    prefix = prefix_trapezoid(vals, grid)
    assert prefix[0] == 0.0
    assert prefix[-1] == pytest.approx(trapezoid(vals, grid), abs=1e-14)


@given(
    n=st.integers(min_value=1, max_value=60),
    i=st.integers(min_value=0, max_value=60),
    j=st.integers(min_value=0, max_value=60),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
@settings(max_examples=60, deadline=None)
def test_prefix_differences_are_interval_integrals(n, i, j, seed):
    i, j = sorted((i % (n + 1), j % (n + 1)))
    grid = UniformGrid(0.0, 3.0, n)
    vals = np.random.default_rng(seed).uniform(-1.0, 1.0, n + 1)
    prefix = prefix_trapezoid(vals, grid)
    if i == j:
        assert prefix[j] - prefix[i] == 0.0
        return
    sub = UniformGrid(grid.nodes[i], grid.nodes[j], j - i)
    assert prefix[j] - prefix[i] == pytest.approx(
        trapezoid(vals[i : j + 1], sub), abs=1e-12
    )


def test_prefix_value_at_nodes_and_interior():
    grid = UniformGrid(0.0, 2.0, 8)
    vals = grid.nodes**2
    prefix = prefix_trapezoid(vals, grid)
    # node queries reproduce the table entries exactly
    for k in (0, 3, 8):
        assert prefix_value_at(prefix, vals, grid, grid.nodes[k]) == prefix[k]
    # interior query: trapezoid of the linearly interpolated integrand
    t = 0.6  # inside cell [0.5, 0.75]
    v_t = vals[2] + ((t - 0.5) / 0.25) * (vals[3] - vals[2])
    expected = prefix[2] + 0.5 * (vals[2] + v_t) * (t - 0.5)
    assert prefix_value_at(prefix, vals, grid, t) == pytest.approx(expected, abs=1e-15)
    with pytest.raises(ValidationError):
        prefix_value_at(prefix, vals, grid, 2.5)


def test_nested_trapezoid_zero_rate_reduces_to_plain_rule():
    grid = UniformGrid(0.0, 1.0, 16)
    base = np.cosh(grid.nodes)
    assert nested_trapezoid(grid, base, np.zeros(17)) == pytest.approx(
        trapezoid(base, grid), abs=1e-14
    )


def test_nested_trapezoid_constant_rate():
    # ∫_0^1 e^{-q s} ds with base 1: (1 - e^{-q})/q
    grid = UniformGrid(0.0, 1.0, 400)
    q = 0.7
    got = nested_trapezoid(grid, np.ones(401), np.full(401, q))
    assert got == pytest.approx((1.0 - np.exp(-q)) / q, rel=1e-6)
