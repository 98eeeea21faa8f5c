"""Flat key=value run configuration.

The on-disk format is plain text, one ``dotted.key = value`` per line,
``#`` comments and blank lines ignored — trivially parseable and
diff-friendly.  ``build_run_config`` merges a parsed file with
command-line overrides and returns a fully validated ``RunConfig``
bundling the scenario, policy choice, optimizer, simulation and
quadrature settings, output directory and master seed.

Coefficient curves accept three spellings, e.g. for the stock drift::

    scenario.mu = 0.07                      # constant
    scenario.mu.base = 0.07                 # sinusoid
    scenario.mu.amplitude = 0.03
    scenario.mu.frequency = 0.5
    scenario.mu.table = 0:0.07, 10:0.05     # piecewise-linear table
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .constraints import ConstraintKind, ConstraintSpec
from .errors import ValidationError
from .lower_bound import SimulationConfig
from .market import CoefficientCurve, MarketScenario, preset_scenario
from .mortality import MortalityModel
from .optimizer import OptimizerConfig

__all__ = ["RunConfig", "parse_kv_file", "build_run_config", "DESK_SCALE"]

# Reduced protocol used for acceptance runs: fewer starts, the
# standard grid and the full simulation budget.
DESK_SCALE = {
    "opt.num_starts": "5",
    "opt.iterations_per_start": "50",
    "quadrature.n_intervals": "100",
    "sim.n_paths": "20000",
    "sim.n_steps": "1000",
}

_PRESET_NAMES = ("example1", "example2")


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs, resolved and validated."""

    scenario: MarketScenario
    policy_kind: str = "affine"
    activation: str = "relu"
    snake_a: float = 10.0
    optimizer: OptimizerConfig = OptimizerConfig()
    simulation: SimulationConfig = SimulationConfig()
    n_intervals: int = 100
    out_dir: str = "out"
    seed: int = 0
    preset: str | None = None
    constraint: ConstraintSpec | None = None

    def __post_init__(self) -> None:
        if self.policy_kind not in ("affine", "mlp"):
            raise ValidationError("policy.kind must be 'affine' or 'mlp'")
        if self.activation not in ("relu", "snake"):
            raise ValidationError("policy.activation must be 'relu' or 'snake'")
        if self.n_intervals < 1:
            raise ValidationError("quadrature.n_intervals must be positive")


def parse_kv_file(path) -> dict[str, str]:
    """Parse a key=value file into a string map.

    Keys must be unique; a line without '=' (after stripping comments)
    is an error reported with its line number.
    """
    out: dict[str, str] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ValidationError(f"{path}:{lineno}: empty key")
            if key in out:
                raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def _pop_float(kv, key, default):
    return float(kv.pop(key)) if key in kv else default


def _pop_int(kv, key, default):
    return int(kv.pop(key)) if key in kv else default


def _pop_str(kv, key, default):
    return kv.pop(key) if key in kv else default


def _parse_table(text: str) -> list[tuple[float, float]]:
    points = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ValidationError(f"table entry {chunk!r} must look like t:value")
        t_str, v_str = chunk.split(":", 1)
        points.append((float(t_str), float(v_str)))
    if not points:
        raise ValidationError("curve table is empty")
    return points


def _pop_curve(kv, name, default: CoefficientCurve) -> CoefficientCurve:
    """Resolve scenario.<name> given as a constant, sinusoid parts, or table."""
    flat = f"scenario.{name}"
    parts = {k: kv.pop(flat + "." + k) for k in ("base", "amplitude", "frequency", "table")
             if flat + "." + k in kv}
    if flat in kv:
        if parts:
            raise ValidationError(f"{flat} given both as a constant and with sub-keys")
        return CoefficientCurve.constant(float(kv.pop(flat)))
    if "table" in parts:
        if len(parts) > 1:
            raise ValidationError(f"{flat}.table excludes the sinusoid sub-keys")
        return CoefficientCurve.from_table(_parse_table(parts["table"]))
    if parts:
        return CoefficientCurve.sinusoid(
            float(parts.get("base", default.base)),
            float(parts.get("amplitude", 0.0)),
            float(parts.get("frequency", 0.0)),
        )
    return default


def build_run_config(
    kv: dict[str, str] | None = None,
    *,
    preset: str | None = None,
    out_dir: str | None = None,
    seed: int | None = None,
    desk_scale: bool = False,
) -> RunConfig:
    """Resolve file keys plus command-line overrides into a RunConfig.

    Precedence, lowest to highest: preset defaults, config-file keys,
    the desk-scale preset, then the explicit --out/--seed overrides.
    Unknown keys are rejected so typos cannot silently change a run.
    """
    kv = dict(kv or {})
    if desk_scale:
        kv.update(DESK_SCALE)

    preset_name = _pop_str(kv, "scenario.preset", None)
    if preset is not None:
        preset_name = preset
    if preset_name is not None and preset_name not in _PRESET_NAMES:
        raise ValidationError(
            f"unknown preset {preset_name!r}; choose from {list(_PRESET_NAMES)}"
        )
    base = preset_scenario(preset_name or "example1")

    mortality = MortalityModel(
        x=_pop_float(kv, "mortality.initial_age", base.mortality.x),
        m=_pop_float(kv, "mortality.modal_age", base.mortality.m),
        b=_pop_float(kv, "mortality.dispersion", base.mortality.b),
    )
    scenario = replace(
        base,
        r=_pop_curve(kv, "r", base.r),
        mu=_pop_curve(kv, "mu", base.mu),
        sigma=_pop_curve(kv, "sigma", base.sigma),
        mu_Y=_pop_float(kv, "scenario.mu_y", base.mu_Y),
        sigma_Y=_pop_float(kv, "scenario.sigma_y", base.sigma_Y),
        Y0=_pop_float(kv, "scenario.y0", base.Y0),
        W0=_pop_float(kv, "scenario.w0", base.W0),
        gamma=_pop_float(kv, "scenario.gamma", base.gamma),
        delta_tilde=_pop_float(kv, "scenario.delta_tilde", base.delta_tilde),
        T_R=_pop_float(kv, "scenario.t_retire", base.T_R),
        T=_pop_float(kv, "scenario.horizon", base.T),
        mortality=mortality,
    )

    optimizer = OptimizerConfig(
        num_starts=_pop_int(kv, "opt.num_starts", 30),
        iterations_per_start=_pop_int(kv, "opt.iterations_per_start", 50),
        algorithm=_pop_str(kv, "opt.algorithm", "QuasiNewtonFD"),
        fd_step=_pop_float(kv, "opt.fd_step", 1e-6),
        obj_tol=_pop_float(kv, "opt.obj_tol", 1e-10),
        param_tol=_pop_float(kv, "opt.param_tol", 1e-12),
        affine_init_std=_pop_float(kv, "policy.affine_init_std", 1e-2),
        mlp_init_std=_pop_float(kv, "policy.mlp_init_std", 1e-2),
    )
    master_seed = seed if seed is not None else _pop_int(kv, "seed", 0)
    kv.pop("seed", None)
    simulation = SimulationConfig(
        n_paths=_pop_int(kv, "sim.n_paths", 20000),
        n_steps=_pop_int(kv, "sim.n_steps", 1000),
        sobol_skip=_pop_int(kv, "sim.sobol_skip", 4000),
        seed=master_seed,
    )

    constraint = None
    if "constraint.kind" in kv:
        try:
            kind = ConstraintKind(kv.pop("constraint.kind"))
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        constraint = ConstraintSpec(
            kind=kind,
            min_capital=_pop_float(kv, "constraint.min_capital", 0.0),
        )

    file_out_dir = _pop_str(kv, "out.dir", "out")
    config = RunConfig(
        scenario=scenario,
        policy_kind=_pop_str(kv, "policy.kind", "affine"),
        activation=_pop_str(kv, "policy.activation", "relu"),
        snake_a=_pop_float(kv, "policy.snake_a", 10.0),
        optimizer=optimizer,
        simulation=simulation,
        n_intervals=_pop_int(kv, "quadrature.n_intervals", 100),
        out_dir=out_dir if out_dir is not None else file_out_dir,
        seed=master_seed,
        preset=preset_name,
        constraint=constraint,
    )
    if kv:
        raise ValidationError(f"unknown config keys: {sorted(kv)}")
    return config
