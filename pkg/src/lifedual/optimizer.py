"""Multi-start minimization of the upper bound over policy parameters.

The objective is the initial-state upper bound as a function of the
flat parameter vector of a drift-adjustment policy.  It is smooth
almost everywhere (the positive-part wrappers kink only on a
measure-zero set), so the default algorithm is a quasi-Newton method
fed with central finite-difference gradients; Nelder–Mead is offered
as a derivative-free fallback for the 8-parameter affine family.

Each start draws its own initialization from the configured seed;
starts are independent, and the reduction picks the lowest final
objective with ties broken by the lowest start index, so results are
reproducible regardless of evaluation order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as sciopt

from . import drift_policy
from .closed_form import GFunction, origin_upper_bound
from .errors import NumericalError, ValidationError
from .market import MarketScenario

__all__ = [
    "OptimizerConfig",
    "OptimizationTrace",
    "numerical_gradient",
    "minimize_upper_bound",
]

_ALGORITHMS = ("QuasiNewtonFD", "NelderMead")


@dataclass(frozen=True)
class OptimizerConfig:
    """Multi-start protocol.

    ``iterations_per_start`` caps the solver iterations of each start
    (0 returns the best initialization unmodified).  ``fd_step`` is the
    relative central-difference step for the quasi-Newton gradient;
    ``obj_tol``/``param_tol`` map onto the solver's objective-change
    and parameter-change stopping rules.
    """

    num_starts: int = 30
    iterations_per_start: int = 50
    algorithm: str = "QuasiNewtonFD"
    fd_step: float = 1e-6
    obj_tol: float = 1e-10
    param_tol: float = 1e-12
    max_init_retries: int = 3
    affine_init_std: float = 1e-2
    mlp_init_std: float = 1e-2

    def __post_init__(self) -> None:
        if self.num_starts < 1:
            raise ValidationError("num_starts must be positive")
        if self.iterations_per_start < 0:
            raise ValidationError("iterations_per_start must be nonnegative")
        if self.algorithm not in _ALGORITHMS:
            raise ValidationError(f"algorithm must be one of {_ALGORITHMS}")
        if self.fd_step <= 0 or self.obj_tol <= 0 or self.param_tol <= 0:
            raise ValidationError("fd_step and tolerances must be positive")


@dataclass
class OptimizationTrace:
    """Per-iteration incumbents and the winning start.

    ``entries`` rows are (start index, iteration, incumbent objective);
    the incumbent is the running best within the start, so each start's
    sequence is nonincreasing.
    """

    entries: list[tuple[int, int, float]] = field(default_factory=list)
    per_start_final: list[float] = field(default_factory=list)
    best_params: np.ndarray | None = None
    best_objective: float = float("inf")
    best_start: int = -1


def numerical_gradient(objective, params, fd_step: float) -> np.ndarray:
    """Central-difference gradient with per-coordinate relative steps.

    Coordinate steps are fd_step*max(1, |p_i|).  If a perturbed point
    evaluates non-finite, that coordinate falls back to a one-sided
    difference (flagged with a warning); both sides non-finite raises.
    """
    params = np.asarray(params, dtype=float)
    f0 = None
    grad = np.empty(params.size)
    for i in range(params.size):
        h = fd_step * max(1.0, abs(params[i]))
        up = params.copy()
        up[i] += h
        dn = params.copy()
        dn[i] -= h
        f_up, f_dn = objective(up), objective(dn)
        if np.isfinite(f_up) and np.isfinite(f_dn):
            grad[i] = (f_up - f_dn) / (2.0 * h)
            continue
        if f0 is None:
            f0 = objective(params)
        if not np.isfinite(f0):
            raise NumericalError("objective non-finite at the expansion point")
        if np.isfinite(f_up):
            warnings.warn(f"one-sided gradient fallback in coordinate {i}")
            grad[i] = (f_up - f0) / h
        elif np.isfinite(f_dn):
            warnings.warn(f"one-sided gradient fallback in coordinate {i}")
            grad[i] = (f0 - f_dn) / h
        else:
            raise NumericalError(f"objective non-finite on both sides in coordinate {i}")
    return grad


def _run_single_start(objective, x0, config, trace, start_idx):
    """One local minimization; records per-iteration incumbents."""
    best_x = np.asarray(x0, dtype=float)
    best_f = float(objective(best_x))
    trace.entries.append((start_idx, 0, best_f))
    if config.iterations_per_start == 0:
        return best_x, best_f

    iteration = [0]

    def callback(xk):
        nonlocal best_x, best_f
        iteration[0] += 1
        fk = float(objective(xk))
        if np.isfinite(fk) and fk < best_f:
            best_f = fk
            best_x = np.asarray(xk, dtype=float).copy()
        trace.entries.append((start_idx, iteration[0], best_f))

    if config.algorithm == "QuasiNewtonFD":
        res = sciopt.minimize(
            objective,
            x0,
            method="BFGS",
            jac=lambda p: numerical_gradient(objective, p, config.fd_step),
            callback=callback,
            options={
                "maxiter": config.iterations_per_start,
                "gtol": config.obj_tol,
                "xrtol": config.param_tol,
            },
        )
    else:
        res = sciopt.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            callback=callback,
            options={
                "maxiter": config.iterations_per_start,
                "fatol": config.obj_tol,
                "xatol": config.param_tol,
            },
        )
    f_final = float(res.fun)
    if np.isfinite(f_final) and f_final < best_f:
        best_f = f_final
        best_x = np.asarray(res.x, dtype=float)
    return best_x, best_f


def minimize_upper_bound(
    scenario: MarketScenario,
    g: GFunction,
    policy_kind: str,
    config: OptimizerConfig,
    seed: int = 0,
    activation: str = "relu",
    snake_a: float = 10.0,
):
    """Minimize the initial-state upper bound over flat policy parameters.

    Returns (best policy, trace).  Initializations are drawn per start
    from ``seed``; a start whose initial objective is non-finite is
    redrawn up to ``max_init_retries`` times before failing.  The
    returned objective is the minimum over every start's final value.
    """

    def build(params):
        return drift_policy.make_policy(
            policy_kind,
            params,
            t_retire=scenario.T_R,
            activation=activation,
            snake_a=snake_a,
        )

    def objective(params):
        return origin_upper_bound(scenario, g, build(params))

    trace = OptimizationTrace()
    for start in range(config.num_starts):
        x0 = None
        for retry in range(config.max_init_retries + 1):
            candidate = drift_policy.init_params(
                policy_kind,
                (seed, start, retry),
                affine_std=config.affine_init_std,
                mlp_std=config.mlp_init_std,
            )
            if np.isfinite(objective(candidate)):
                x0 = candidate
                break
        if x0 is None:
            raise NumericalError(
                f"start {start}: objective non-finite after {config.max_init_retries} redraws"
            )
        x_final, f_final = _run_single_start(objective, x0, config, trace, start)
        trace.per_start_final.append(f_final)
        if f_final < trace.best_objective:
            trace.best_objective = f_final
            trace.best_params = x_final
            trace.best_start = start

    return build(trace.best_params), trace
