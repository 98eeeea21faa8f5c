"""Finite-difference gradients and the multi-start reduction."""

import dataclasses
from unittest import mock

import numpy as np
import pytest

from lifedual.closed_form import compute_g, origin_upper_bound
from lifedual.drift_policy import AffinePolicy, init_params
from lifedual.errors import NumericalError, ValidationError
from lifedual.market import preset_scenario
from lifedual.optimizer import (
    OptimizerConfig,
    minimize_upper_bound,
    numerical_gradient,
)
from lifedual.quadrature import UniformGrid

SC = preset_scenario("example1")


def _g(n=100, scenario=SC):
    return compute_g(scenario, UniformGrid(0.0, scenario.T, n))


def test_numerical_gradient_quadratic():
    f = lambda p: (p[0] - 1.0) ** 2 + 2.0 * (p[1] + 2.0) ** 2
    grad = numerical_gradient(f, np.array([2.0, -4.0]), 1e-6)
    assert grad == pytest.approx([2.0, -8.0], abs=1e-6)


def test_numerical_gradient_ignores_invariant_coordinate():
    f = lambda p: p[0] ** 2
    grad = numerical_gradient(f, np.array([3.0, 7.0]), 1e-6)
    assert grad[0] == pytest.approx(6.0, abs=1e-6)
    assert grad[1] == 0.0


def test_numerical_gradient_one_sided_fallback():
    def f(p):
        if p[1] > 0.5:
            return float("nan")
        return 3.0 * p[0] + 2.0 * p[1]

    with pytest.warns(UserWarning, match="one-sided"):
        grad = numerical_gradient(f, np.array([0.0, 0.5]), 1e-6)
    assert grad == pytest.approx([3.0, 2.0], abs=1e-5)


def test_numerical_gradient_failure_modes():
    def both_sides_bad(p):
        return p[0] ** 2 if p[1] == 0.5 else float("nan")

    with pytest.raises(NumericalError):
        numerical_gradient(both_sides_bad, np.array([1.0, 0.5]), 1e-6)
    with pytest.raises(NumericalError):
        numerical_gradient(lambda p: float("nan"), np.array([1.0, 0.5]), 1e-6)


def test_config_validation():
    with pytest.raises(ValidationError):
        OptimizerConfig(num_starts=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(iterations_per_start=-1)
    with pytest.raises(ValidationError):
        OptimizerConfig(algorithm="Genetic")
    with pytest.raises(ValidationError):
        OptimizerConfig(fd_step=0.0)


def test_zero_iterations_returns_best_initialization():
    g = _g()
    cfg = OptimizerConfig(num_starts=3, iterations_per_start=0)
    policy, trace = minimize_upper_bound(SC, g, "affine", cfg, seed=9)
    inits = [init_params("affine", (9, s, 0)) for s in range(3)]
    values = [
        origin_upper_bound(SC, g, AffinePolicy(params=tuple(p), t_retire=SC.T_R))
        for p in inits
    ]
    k = int(np.argmin(values))
    assert trace.best_start == k
    assert trace.best_objective == values[k]
    assert np.array_equal(trace.best_params, inits[k])
    assert np.array_equal(np.asarray(policy.params), inits[k])


def test_slack_constraint_recovers_zero_adjustment():
    # without income the unconstrained stock demand is 5/6 of wealth,
    # inside [0, W], so the best adjustment is v = 0 and the optimizer
    # must land on the unadjusted value from above
    sc = dataclasses.replace(SC, Y0=0.0)
    g = _g(scenario=sc)
    j0 = origin_upper_bound(sc, g, AffinePolicy(params=(0.0,) * 8, t_retire=sc.T_R))
    cfg = OptimizerConfig(num_starts=3, iterations_per_start=30)
    _, trace = minimize_upper_bound(sc, g, "affine", cfg, seed=5)
    assert trace.best_objective >= j0 - 1e-12
    assert trace.best_objective <= j0 + 1e-6 * abs(j0)


def test_multi_start_is_reproducible():
    g = _g(50)
    cfg = OptimizerConfig(num_starts=2, iterations_per_start=10)
    _, t1 = minimize_upper_bound(SC, g, "affine", cfg, seed=3)
    _, t2 = minimize_upper_bound(SC, g, "affine", cfg, seed=3)
    assert np.array_equal(t1.best_params, t2.best_params)
    assert t1.entries == t2.entries
    _, t3 = minimize_upper_bound(SC, g, "affine", cfg, seed=4)
    assert not np.array_equal(t1.best_params, t3.best_params)


def test_incumbent_sequences_are_nonincreasing():
    g = _g(50)
    for algorithm in ("QuasiNewtonFD", "NelderMead"):
        cfg = OptimizerConfig(
            num_starts=2, iterations_per_start=25, algorithm=algorithm
        )
        _, trace = minimize_upper_bound(SC, g, "mlp", cfg, seed=1)
        for s in range(2):
            inc = [f for (start, _, f) in trace.entries if start == s]
            assert len(inc) >= 1
            assert all(b <= a + 1e-15 for a, b in zip(inc, inc[1:]))
        assert trace.best_objective == min(trace.per_start_final)
        # a bounded local step should not lose to its own initialization
        first = {s: None for s in range(2)}
        for start, it, f in trace.entries:
            if it == 0:
                first[start] = f
        assert all(
            final <= first[s] + 1e-15
            for s, final in enumerate(trace.per_start_final)
        )


def test_bad_initialization_is_redrawn():
    g = _g(50)
    bad = tuple(init_params("affine", (7, 0, 0)))
    real = origin_upper_bound

    def fake(scenario, gg, policy):
        if np.array_equal(policy.params, bad):
            return float("nan")
        return real(scenario, gg, policy)

    cfg = OptimizerConfig(num_starts=1, iterations_per_start=0)
    with mock.patch("lifedual.optimizer.origin_upper_bound", side_effect=fake):
        _, trace = minimize_upper_bound(SC, g, "affine", cfg, seed=7)
    assert np.array_equal(trace.best_params, init_params("affine", (7, 0, 1)))


def test_unrecoverable_initialization_raises():
    g = _g(50)
    cfg = OptimizerConfig(num_starts=1, iterations_per_start=0, max_init_retries=2)
    with mock.patch(
        "lifedual.optimizer.origin_upper_bound", return_value=float("nan")
    ):
        with pytest.raises(NumericalError, match="redraws"):
            minimize_upper_bound(SC, g, "affine", cfg, seed=7)


def test_exact_ties_go_to_the_lowest_start():
    g = _g(50)
    cfg = OptimizerConfig(num_starts=4, iterations_per_start=0)
    with mock.patch("lifedual.optimizer.origin_upper_bound", return_value=-1.0):
        _, trace = minimize_upper_bound(SC, g, "affine", cfg, seed=0)
    assert trace.best_start == 0
