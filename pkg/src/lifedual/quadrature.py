"""Trapezoidal quadrature on uniform time grids.

All deterministic integrals in the bound computations have the shape

    I(t) = ∫_t^T base(s) · exp(-∫_0^{s-t} q(s-u) du) ds,

where the inner exponent is itself an integral of scenario
coefficients.  Substituting w = s - u turns every inner exponent into a
difference of prefix integrals along the *same* node family,

    ∫_0^{s-t} q(s-u) du = Q(s) - Q(t),   Q(s) = ∫_{t0}^s q(w) dw,

so a single cumulative-trapezoid table serves every (t, s) pair.  This
module provides the grid type, the plain and cumulative trapezoid
rules, and a small nested-integral helper; the closed-form module
builds its aggregates out of these prefix tables in O(n) per curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "UniformGrid",
    "trapezoid",
    "prefix_trapezoid",
    "prefix_value_at",
    "nested_trapezoid",
]


@dataclass(frozen=True)
class UniformGrid:
    """Uniform partition of [t_start, t_end] into n_intervals cells.

    Nodes are t_start + k*h for k = 0..n_intervals with
    h = (t_end - t_start)/n_intervals.
    """

    t_start: float
    t_end: float
    n_intervals: int

    def __post_init__(self) -> None:
        if self.n_intervals < 1:
            raise ValidationError("n_intervals must be >= 1")
        if not self.t_start <= self.t_end:
            raise ValidationError("grid requires t_start <= t_end")

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / self.n_intervals

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_intervals + 1)


def trapezoid(values: np.ndarray, grid: UniformGrid) -> float:
    """Composite trapezoid rule h*(v0/2 + v1 + ... + v_{n-1} + vn/2).

    Exact for integrands that are affine on each cell.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != grid.n_intervals + 1:
        raise ValidationError(
            f"expected {grid.n_intervals + 1} node values, got {values.shape[-1]}"
        )
    h = grid.step
    return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))


def prefix_trapezoid(values: np.ndarray, grid: UniformGrid) -> np.ndarray:
    """Cumulative trapezoid table P with P[k] = ∫_{t0}^{t_k} v dt.

    P[0] = 0 and P[n] equals ``trapezoid(values, grid)`` up to rounding;
    differences P[j] - P[i] reproduce the rule on [t_i, t_j] exactly
    (the trapezoid rule is additive over sub-intervals).
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != grid.n_intervals + 1:
        raise ValidationError(
            f"expected {grid.n_intervals + 1} node values, got {values.shape[-1]}"
        )
    h = grid.step
    out = np.empty(values.shape[-1])
    out[0] = 0.0
    np.cumsum(0.5 * h * (values[1:] + values[:-1]), out=out[1:])
    return out


def prefix_value_at(
    prefix: np.ndarray, values: np.ndarray, grid: UniformGrid, t: float
) -> float:
    """Prefix integral ∫_{t0}^{t} v dt at an off-node point t.

    The last partial cell is closed with one trapezoid using the
    linearly interpolated integrand value at t, so the result stays
    O(h²)-consistent with the node table.
    """
    nodes = grid.nodes
    if not nodes[0] <= t <= nodes[-1]:
        raise ValidationError(f"t={t} outside grid [{nodes[0]}, {nodes[-1]}]")
    j = int(np.searchsorted(nodes, t, side="right")) - 1
    j = min(j, grid.n_intervals)  # t == t_end lands past the last cell
    if j == grid.n_intervals:
        return float(prefix[-1])
    frac = (t - nodes[j]) / grid.step
    v_t = values[j] + frac * (values[j + 1] - values[j])
    return float(prefix[j] + 0.5 * (values[j] + v_t) * (t - nodes[j]))


def nested_trapezoid(
    grid: UniformGrid,
    base_values: np.ndarray,
    inner_rate_values: np.ndarray,
) -> float:
    """Evaluate ∫ base(s)·exp(-∫_{t0}^{s} q) ds on the grid.

    ``inner_rate_values`` holds q at the nodes; its cumulative
    trapezoid forms the inner exponent, and the damped integrand is
    then integrated by the outer trapezoid rule.  A zero inner rate
    reduces the result to ``trapezoid(base_values, grid)``.
    """
    base_values = np.asarray(base_values, dtype=float)
    exponent = prefix_trapezoid(inner_rate_values, grid)
    return trapezoid(base_values * np.exp(-exponent), grid)
