"""Trading-constraint catalog: support functions and dual cones.

A constraint set A is a nonempty closed convex subset of R^{n+1} of
bond/stock dollar positions (alpha, theta).  Its support function

    delta(v) = sup_{(alpha, theta) in A} -(alpha*v0 + theta . v_minus)

prices the constraint inside the dual bound, and the effective domain
Atilde = {v : delta(v) < inf} is the cone of admissible drift
adjustments.  The catalog below stores the closed-form delta/Atilde
pairs for the standard constraint families; only the portfolio-mix
kind (with mix set D = [0, 1], i.e. no short sales and no borrowing)
is exercised by the numerical engines — for it Atilde = {v >= 0} and
delta = 0 — while the rest are descriptors usable for validation and
experimentation.

Sign conventions: for cones, delta = 0 on the whole effective domain;
a minimum-capital floor K shifts delta to -K*v0.  Out-of-domain is an
explicit flag, never a floating-point infinity inside arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ValidationError

__all__ = [
    "ConstraintKind",
    "ConstraintSpec",
    "SupportValue",
    "support",
    "in_effective_domain",
    "clamp_stock_position",
    "sample_constraint_set",
]

_EQ_TOL = 1e-12


class ConstraintKind(str, Enum):
    UNCONSTRAINED = "unconstrained"
    NONTRADEABLE = "nontradeable"
    SHORT_SALE = "short_sale"
    BUYING = "buying"
    PORTFOLIO_MIX = "portfolio_mix"
    MIN_CAPITAL = "min_capital"
    COLLATERAL = "collateral"


class SupportValue(NamedTuple):
    """delta(v) as an extended value: finite=False marks +infinity."""

    finite: bool
    value: float

    @classmethod
    def infinite(cls) -> "SupportValue":
        return cls(False, float("nan"))


@dataclass(frozen=True)
class ConstraintSpec:
    """Descriptor of one constraint family.

    Parameters
    ----------
    kind : ConstraintKind
    n : int
        Number of stocks (adjustment vectors live in R^{n+1}).
    m : int
        For the nontradeable/short-sale/buying kinds: stocks 1..m are
        unrestricted and stocks m+1..n carry the restriction.
    min_capital : float
        Capital floor K >= 0 (min-capital kind).
    psi : tuple of float
        Collateral fractions (psi_0..psi_n), each in [0, 1].
    gamma_c : float
        Collateral haircut in [0, 1].
    """

    kind: ConstraintKind = ConstraintKind.PORTFOLIO_MIX
    n: int = 1
    m: int = 0
    min_capital: float = 0.0
    psi: tuple[float, ...] | None = None
    gamma_c: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("need at least one stock")
        if not 0 <= self.m <= self.n:
            raise ValidationError("m must lie in [0, n]")
        if self.min_capital < 0:
            raise ValidationError("capital floor must be nonnegative")
        if self.kind is ConstraintKind.COLLATERAL:
            psi = self.psi if self.psi is not None else (1.0,) * (self.n + 1)
            if len(psi) != self.n + 1 or any(not 0 <= p <= 1 for p in psi):
                raise ValidationError("psi must be n+1 fractions in [0,1]")
            if not 0 <= self.gamma_c <= 1:
                raise ValidationError("gamma_c must lie in [0,1]")

    def _collateral_psi(self) -> np.ndarray:
        return np.asarray(self.psi if self.psi is not None else (1.0,) * (self.n + 1))


def _check_dim(spec: ConstraintSpec, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (spec.n + 1,):
        raise ValidationError(f"adjustment vector must have dimension {spec.n + 1}")
    return v


def in_effective_domain(spec: ConstraintSpec, v) -> bool:
    """Membership of v = (v0, v_minus) in the dual cone Atilde."""
    v = _check_dim(spec, v)
    kind = spec.kind
    if kind is ConstraintKind.UNCONSTRAINED:
        # sup over all of R^{n+1} is finite only at v = 0
        return bool(np.all(np.abs(v) <= _EQ_TOL))
    if kind is ConstraintKind.NONTRADEABLE:
        # alpha and theta_1..theta_m are free -> their multipliers vanish
        return bool(np.all(np.abs(v[: spec.m + 1]) <= _EQ_TOL))
    if kind is ConstraintKind.SHORT_SALE:
        return bool(
            np.all(np.abs(v[: spec.m + 1]) <= _EQ_TOL)
            and np.all(v[spec.m + 1 :] >= -_EQ_TOL)
        )
    if kind is ConstraintKind.BUYING:
        return bool(
            np.all(np.abs(v[: spec.m + 1]) <= _EQ_TOL)
            and np.all(v[spec.m + 1 :] <= _EQ_TOL)
        )
    if kind is ConstraintKind.PORTFOLIO_MIX:
        # A = {alpha >= 0, theta >= 0}: dual cone is the nonnegative orthant
        return bool(np.all(v >= 0))
    if kind is ConstraintKind.MIN_CAPITAL:
        # Atilde = {k*(1,...,1): k >= 0}
        k = v[0]
        return bool(k >= 0 and np.all(np.abs(v - k) <= _EQ_TOL * max(1.0, abs(k))))
    if kind is ConstraintKind.COLLATERAL:
        return _collateral_membership(spec, v)
    raise ValidationError(f"unknown constraint kind {kind}")


def support(spec: ConstraintSpec, v) -> SupportValue:
    """Support function delta(v); infinite flag outside Atilde.

    delta vanishes on the effective domain for every catalog kind
    except the capital floor, where delta(v) = -K*v0.
    """
    v = _check_dim(spec, v)
    if not in_effective_domain(spec, v):
        return SupportValue.infinite()
    if spec.kind is ConstraintKind.MIN_CAPITAL:
        return SupportValue(True, -spec.min_capital * float(v[0]))
    return SupportValue(True, 0.0)


def clamp_stock_position(spec: ConstraintSpec, theta: float, wealth: float) -> float:
    """Project a stock position onto [0, wealth] (portfolio-mix only).

    The other catalog kinds are descriptors without a simulation-side
    projection rule and are rejected.
    """
    if spec.kind is not ConstraintKind.PORTFOLIO_MIX:
        raise ValidationError(
            f"position clamping implemented for portfolio_mix only, got {spec.kind.value}"
        )
    if wealth < 0:
        raise ValidationError("wealth must be nonnegative")
    return float(min(max(theta, 0.0), wealth))


def sample_constraint_set(
    spec: ConstraintSpec, n_samples: int, rng: np.random.Generator, radius: float = 10.0
) -> np.ndarray:
    """Draw points of A, for brute-force support estimates and tests.

    Points are sampled uniformly in a centered box of half-width
    ``radius`` and filtered/projected into A.  Returns an array of
    shape (k, n+1) with k <= n_samples (plus the origin when 0 in A).
    """
    box = rng.uniform(-radius, radius, size=(n_samples, spec.n + 1))
    kind = spec.kind
    if kind is ConstraintKind.UNCONSTRAINED:
        return box
    if kind is ConstraintKind.NONTRADEABLE:
        box[:, spec.m + 1 :] = 0.0
        return box
    if kind is ConstraintKind.SHORT_SALE:
        box[:, spec.m + 1 :] = np.abs(box[:, spec.m + 1 :])
        return box
    if kind is ConstraintKind.BUYING:
        box[:, spec.m + 1 :] = -np.abs(box[:, spec.m + 1 :])
        return box
    if kind is ConstraintKind.PORTFOLIO_MIX:
        return np.abs(box)
    if kind is ConstraintKind.MIN_CAPITAL:
        keep = box.sum(axis=1) >= spec.min_capital
        return box[keep]
    if kind is ConstraintKind.COLLATERAL:
        psi = spec._collateral_psi()
        lhs = box @ psi
        rhs = spec.gamma_c * (np.maximum(box, 0.0) @ psi)
        pts = box[lhs >= rhs]
        return np.vstack([pts, np.zeros(spec.n + 1)])
    raise ValidationError(f"unknown constraint kind {kind}")


def _collateral_membership(spec: ConstraintSpec, v: np.ndarray, n_samples: int = 10_000) -> bool:
    """Sampled dual-cone check: v.(alpha,theta) >= 0 over points of A.

    The collateral cone has no convenient closed form, so membership is
    verified against a deterministic sample of A (documented as
    approximate).
    """
    rng = np.random.default_rng(1234)  # fixed: membership must be a pure predicate
    pts = sample_constraint_set(spec, n_samples, rng)
    scale = np.maximum(1.0, np.linalg.norm(pts, axis=1) * float(np.linalg.norm(v)))
    return bool(np.all(pts @ v >= -1e-9 * scale))
