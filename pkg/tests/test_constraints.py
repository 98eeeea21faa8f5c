"""Support-function catalog: closed forms vs brute force, cone properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifedual.constraints import (
    ConstraintKind,
    ConstraintSpec,
    clamp_stock_position,
    in_effective_domain,
    sample_constraint_set,
    support,
)
from lifedual.errors import ValidationError

PM = ConstraintSpec(kind=ConstraintKind.PORTFOLIO_MIX, n=1)
MC5 = ConstraintSpec(kind=ConstraintKind.MIN_CAPITAL, n=1, min_capital=5.0)


def test_support_values_from_catalog():
    assert support(PM, (1.0, 1.0)) == (True, 0.0)
    assert support(MC5, (2.0, 2.0)).value == pytest.approx(-10.0)
    assert not support(PM, (-1.0, 0.0)).finite


def test_effective_domain_membership():
    assert in_effective_domain(PM, (0.0, 0.0))
    assert not in_effective_domain(PM, (0.1, -0.1))
    ss = ConstraintSpec(kind=ConstraintKind.SHORT_SALE, n=2, m=1)
    assert in_effective_domain(ss, (0.0, 0.0, 0.5))
    assert not in_effective_domain(ss, (0.0, 0.3, 0.5))
    nt = ConstraintSpec(kind=ConstraintKind.NONTRADEABLE, n=2, m=1)
    assert in_effective_domain(nt, (0.0, 0.0, -3.0))
    assert not in_effective_domain(nt, (0.0, 0.1, 0.0))
    buy = ConstraintSpec(kind=ConstraintKind.BUYING, n=1, m=0)
    assert in_effective_domain(buy, (0.0, -0.7))
    assert not in_effective_domain(buy, (0.0, 0.7))
    un = ConstraintSpec(kind=ConstraintKind.UNCONSTRAINED, n=1)
    assert in_effective_domain(un, (0.0, 0.0))
    assert not in_effective_domain(un, (0.0, 1e-6))


def test_min_capital_domain_is_the_diagonal_ray():
    assert in_effective_domain(MC5, (2.0, 2.0))
    assert not in_effective_domain(MC5, (2.0, 1.0))
    assert not in_effective_domain(MC5, (-1.0, -1.0))


def test_dimension_mismatch_rejected():
    with pytest.raises(ValidationError):
        support(PM, (1.0, 1.0, 1.0))


def test_clamp_stock_position():
    assert clamp_stock_position(PM, -3.0, 10.0) == 0.0
    assert clamp_stock_position(PM, 15.0, 10.0) == 10.0
    assert clamp_stock_position(PM, 4.0, 10.0) == 4.0
    with pytest.raises(ValidationError):
        clamp_stock_position(MC5, 4.0, 10.0)
    with pytest.raises(ValidationError):
        clamp_stock_position(PM, 4.0, -1.0)


@given(
    v0=st.floats(min_value=0.0, max_value=5.0),
    vm=st.floats(min_value=0.0, max_value=5.0),
    k=st.floats(min_value=1e-3, max_value=10.0),
)
@settings(max_examples=100, deadline=None)
def test_support_positive_homogeneity(v0, vm, k):
    for spec in (PM, MC5):
        v = np.array([v0, vm]) if spec is PM else np.array([v0, v0])
        base = support(spec, v)
        scaled = support(spec, k * v)
        assert scaled.finite == base.finite
        assert scaled.value == pytest.approx(k * base.value, abs=1e-12)


@given(
    a0=st.floats(min_value=0.0, max_value=5.0),
    a1=st.floats(min_value=0.0, max_value=5.0),
    b0=st.floats(min_value=0.0, max_value=5.0),
    b1=st.floats(min_value=0.0, max_value=5.0),
)
@settings(max_examples=100, deadline=None)
def test_support_subadditivity(a0, a1, b0, b1):
    v1, v2 = np.array([a0, a1]), np.array([b0, b1])
    assert (
        support(PM, v1 + v2).value
        <= support(PM, v1).value + support(PM, v2).value + 1e-12
    )
    d1, d2 = np.array([a0, a0]), np.array([b0, b0])
    assert (
        support(MC5, d1 + d2).value
        <= support(MC5, d1).value + support(MC5, d2).value + 1e-12
    )


@pytest.mark.parametrize(
    "spec,v",
    [
        (PM, np.array([0.3, 1.7])),
        (PM, np.array([0.0, 0.0])),
        (MC5, np.array([2.0, 2.0])),
        (MC5, np.array([0.25, 0.25])),
    ],
)
def test_brute_force_grid_estimate_matches_closed_form(spec, v):
    # maximize -(alpha*v0 + theta*v_minus) over a dense grid of A in a
    # large box; the estimate lower-bounds delta and agrees at this
    # resolution because the maximizer lands on grid points
    axis = np.linspace(-1000.0, 1000.0, 2001)
    alpha, theta = np.meshgrid(axis, axis, indexing="ij", sparse=True)
    if spec.kind is ConstraintKind.PORTFOLIO_MIX:
        feasible = (alpha >= 0) & (theta >= 0)
    else:
        feasible = alpha + theta >= spec.min_capital
    objective = np.where(feasible, -(alpha * v[0] + theta * v[1]), -np.inf)
    estimate = float(objective.max())
    exact = support(spec, v).value
    assert estimate <= exact + 1e-9
    assert estimate == pytest.approx(exact, abs=1e-6)


def test_brute_force_sampler_never_exceeds_closed_form():
    rng = np.random.default_rng(42)
    for spec in (PM, MC5):
        pts = sample_constraint_set(spec, 5000, rng, radius=50.0)
        for v in ((0.5, 0.5), (2.0, 2.0)):
            vv = np.asarray(v)
            if not in_effective_domain(spec, vv):
                continue
            estimate = float((-(pts @ vv)).max())
            assert estimate <= support(spec, vv).value + 1e-9


def test_collateral_domain_contains_origin_and_rejects_negatives():
    col = ConstraintSpec(
        kind=ConstraintKind.COLLATERAL, n=1, psi=(0.5, 0.5), gamma_c=0.9
    )
    assert in_effective_domain(col, (0.0, 0.0))
    assert support(col, (0.0, 0.0)) == (True, 0.0)
    # strongly negative directions pair negatively with some point of A
    assert not in_effective_domain(col, (-1.0, -1.0))


def test_spec_validation():
    with pytest.raises(ValidationError):
        ConstraintSpec(kind=ConstraintKind.SHORT_SALE, n=1, m=2)
    with pytest.raises(ValidationError):
        ConstraintSpec(kind=ConstraintKind.MIN_CAPITAL, n=1, min_capital=-1.0)
    with pytest.raises(ValidationError):
        ConstraintSpec(kind=ConstraintKind.COLLATERAL, n=1, psi=(0.5,), gamma_c=0.5)
