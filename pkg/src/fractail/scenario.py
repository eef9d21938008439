"""Scenario files: declarative experiment descriptions.

A scenario is a TOML file naming one experiment kind plus the physical and
numerical ingredients it needs.  Parsing is strict: unknown tables or keys
are hard errors naming the offending path, wrong types are hard errors
naming the field, and cross-field rules (tail grids must start beyond the
source support, fractional orders must avoid the classical limit) are
checked up front so long sweeps cannot die late on a typo.

Schema (all tables except [scenario] optional unless the kind needs them):

    [scenario]   kind, alpha, rng_seed
    [operator]   kind = "laplacian" | "sturm_liouville", length, n_modes,
                 grid_size, a_values, c_values
    [source]     t0, mu_segments = [[lo, hi, [c0, c1, ...]], ...],
                 f_modal, f2_modal, f_profile, regularity_sigma,
                 offset, engineered_mode
    [observation] kind = "interior" | "flux", region, test_function,
                 point, weight
    [time_grid]  t_min, t_max, points_per_decade (default 16)
    [inverse]    K, M, n_modes, noise_level
    [mlf]        beta
    [tolerances] free map of numeric thresholds, echoed into reports
    [output]     prefix
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from .sources import PiecewisePolynomial, PolySegment, SourceSpec
from .spectral import (
    EigenSystem,
    ObservationSpec,
    SpatialProfile,
    discretize_sturm_liouville,
    laplacian_1d_dirichlet,
    project,
)

__all__ = [
    "ConfigError",
    "Scenario",
    "GridSpec",
    "OperatorConfig",
    "ObservationConfig",
    "InverseConfig",
    "EXPERIMENT_KINDS",
    "load_scenario",
    "parse_scenario",
    "build_system",
    "build_source",
    "build_profile",
    "build_second_profile",
    "build_observation",
    "build_time_grid",
]

EXPERIMENT_KINDS = (
    "forward",
    "tail",
    "extract",
    "scalar",
    "uniqueness",
    "heat-contrast",
    "mlf-table",
)


class ConfigError(ValueError):
    """Scenario validation failure; the message names the offending field."""


_SCHEMA: dict[str, set | None] = {
    "scenario": {"kind", "alpha", "rng_seed"},
    "operator": {"kind", "length", "n_modes", "grid_size", "a_values", "c_values"},
    "source": {
        "t0",
        "mu_segments",
        "f_modal",
        "f2_modal",
        "f_profile",
        "regularity_sigma",
        "offset",
        "engineered_mode",
    },
    "observation": {"kind", "region", "test_function", "point", "weight"},
    "time_grid": {"t_min", "t_max", "points_per_decade"},
    "inverse": {"K", "M", "n_modes", "noise_level"},
    "mlf": {"beta"},
    "tolerances": None,  # free-form numeric map
    "output": {"prefix"},
}


def _reject_unknown(raw: Mapping) -> None:
    for table, content in raw.items():
        if table not in _SCHEMA:
            raise ConfigError(f"unknown table [{table}]")
        if not isinstance(content, Mapping):
            raise ConfigError(f"[{table}] must be a table, got {type(content).__name__}")
        allowed = _SCHEMA[table]
        if allowed is None:
            continue
        for key in content:
            if key not in allowed:
                raise ConfigError(f"unknown key '{table}.{key}'")


def _need(table: Mapping, table_name: str, key: str):
    if key not in table:
        raise ConfigError(f"missing required field '{table_name}.{key}'")
    return table[key]


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{path}' must be an integer, got {value!r}")
    return value


def _as_float_list(value, path: str) -> tuple[float, ...]:
    if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
        raise ConfigError(f"'{path}' must be an array of numbers")
    return tuple(_as_float(v, f"{path}[{i}]") for i, v in enumerate(value))


@dataclass(frozen=True)
class GridSpec:
    t_min: float
    t_max: float
    points_per_decade: int = 16


@dataclass(frozen=True)
class OperatorConfig:
    kind: str = "laplacian"
    length: float = 1.0
    n_modes: int = 64
    grid_size: int = 2000
    a_values: tuple[float, ...] | None = None
    c_values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ObservationConfig:
    kind: str
    region: tuple[float, float]
    test_function: str | None = None
    point: float | None = None
    weight: float = 1.0


@dataclass(frozen=True)
class InverseConfig:
    K: int = 6
    M: int = 6
    n_modes: int = 3
    noise_level: float = 0.0


@dataclass(frozen=True)
class Scenario:
    kind: str
    alpha: float
    rng_seed: int
    operator: OperatorConfig
    t0: float
    mu_segments: tuple[tuple[float, float, tuple[float, ...]], ...]
    f_modal: tuple[float, ...] | None
    f2_modal: tuple[float, ...] | None
    f_profile: str | None
    regularity_sigma: float
    offset: float
    engineered_mode: int | None
    observation: ObservationConfig | None
    grid: GridSpec | None
    inverse: InverseConfig
    mlf_beta: float | None
    tolerances: dict[str, float] = field(default_factory=dict)
    output_prefix: str = "run"
    digest: str = ""


_TAIL_KINDS = {"forward", "tail", "extract", "scalar", "uniqueness", "heat-contrast"}


def parse_scenario(text: bytes | str, name: str = "<scenario>") -> Scenario:
    """Parse and validate scenario TOML given as bytes or text."""
    if isinstance(text, str):
        text = text.encode()
    try:
        raw = tomllib.loads(text.decode())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{name}: TOML parse error: {exc}") from None
    _reject_unknown(raw)

    sc = raw.get("scenario")
    if sc is None:
        raise ConfigError("missing required table [scenario]")
    kind = _need(sc, "scenario", "kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"'scenario.kind' must be one of {', '.join(EXPERIMENT_KINDS)}; got {kind!r}"
        )
    alpha = _as_float(_need(sc, "scenario", "alpha"), "scenario.alpha")
    if not 0.0 < alpha < 2.0:
        raise ConfigError(f"'scenario.alpha' must lie in (0, 2), got {alpha}")
    if alpha == 1.0 and kind != "heat-contrast":
        raise ConfigError(
            "'scenario.alpha' = 1 is only permitted for kind = 'heat-contrast'"
        )
    rng_seed = _as_int(sc.get("rng_seed", 0), "scenario.rng_seed")

    op_raw = raw.get("operator", {})
    op_kind = op_raw.get("kind", "laplacian")
    if op_kind not in ("laplacian", "sturm_liouville"):
        raise ConfigError(
            f"'operator.kind' must be 'laplacian' or 'sturm_liouville', got {op_kind!r}"
        )
    operator = OperatorConfig(
        kind=op_kind,
        length=_as_float(op_raw.get("length", 1.0), "operator.length"),
        n_modes=_as_int(op_raw.get("n_modes", 64), "operator.n_modes"),
        grid_size=_as_int(op_raw.get("grid_size", 2000), "operator.grid_size"),
        a_values=(
            _as_float_list(op_raw["a_values"], "operator.a_values")
            if "a_values" in op_raw
            else None
        ),
        c_values=(
            _as_float_list(op_raw["c_values"], "operator.c_values")
            if "c_values" in op_raw
            else None
        ),
    )
    if operator.length <= 0:
        raise ConfigError(f"'operator.length' must be positive, got {operator.length}")
    if operator.n_modes < 1:
        raise ConfigError("'operator.n_modes' must be at least 1")

    src_raw = raw.get("source", {})
    t0 = _as_float(src_raw.get("t0", 1.0), "source.t0")
    if t0 <= 0:
        raise ConfigError(f"'source.t0' must be positive, got {t0}")
    segments: list[tuple[float, float, tuple[float, ...]]] = []
    raw_segments = src_raw.get("mu_segments", [[0.0, t0, [1.0]]])
    if not isinstance(raw_segments, Sequence):
        raise ConfigError("'source.mu_segments' must be an array of [lo, hi, coeffs]")
    for i, seg in enumerate(raw_segments):
        path = f"source.mu_segments[{i}]"
        if not isinstance(seg, Sequence) or len(seg) != 3:
            raise ConfigError(f"'{path}' must be [lo, hi, coeffs]")
        lo = _as_float(seg[0], f"{path}.lo")
        hi = _as_float(seg[1], f"{path}.hi")
        coeffs = _as_float_list(seg[2], f"{path}.coeffs")
        segments.append((lo, hi, coeffs))
    f_modal = (
        _as_float_list(src_raw["f_modal"], "source.f_modal")
        if "f_modal" in src_raw
        else None
    )
    f2_modal = (
        _as_float_list(src_raw["f2_modal"], "source.f2_modal")
        if "f2_modal" in src_raw
        else None
    )
    f_profile = src_raw.get("f_profile")
    if f_profile is not None and not isinstance(f_profile, str):
        raise ConfigError("'source.f_profile' must be a string")
    if f_profile is not None and f_modal is not None:
        raise ConfigError("give 'source.f_modal' or 'source.f_profile', not both")
    regularity_sigma = _as_float(
        src_raw.get("regularity_sigma", 1.0), "source.regularity_sigma"
    )
    offset = _as_float(src_raw.get("offset", 0.0), "source.offset")
    engineered_mode = (
        _as_int(src_raw["engineered_mode"], "source.engineered_mode")
        if "engineered_mode" in src_raw
        else None
    )
    if engineered_mode is not None and engineered_mode < 1:
        raise ConfigError("'source.engineered_mode' must be a positive mode index")

    obs_raw = raw.get("observation")
    observation = None
    if obs_raw is not None:
        obs_kind = _need(obs_raw, "observation", "kind")
        if obs_kind not in ("interior", "flux"):
            raise ConfigError(
                f"'observation.kind' must be 'interior' or 'flux', got {obs_kind!r}"
            )
        region = _as_float_list(
            obs_raw.get("region", [0.0, operator.length]), "observation.region"
        )
        if len(region) != 2 or not region[0] < region[1]:
            raise ConfigError("'observation.region' must be [lo, hi] with lo < hi")
        tf = obs_raw.get("test_function")
        if tf is not None and not isinstance(tf, str):
            raise ConfigError("'observation.test_function' must be a string")
        point = (
            _as_float(obs_raw["point"], "observation.point")
            if "point" in obs_raw
            else None
        )
        observation = ObservationConfig(
            kind=obs_kind,
            region=(region[0], region[1]),
            test_function=tf,
            point=point,
            weight=_as_float(obs_raw.get("weight", 1.0), "observation.weight"),
        )

    grid_raw = raw.get("time_grid")
    grid = None
    if grid_raw is not None:
        grid = GridSpec(
            t_min=_as_float(_need(grid_raw, "time_grid", "t_min"), "time_grid.t_min"),
            t_max=_as_float(_need(grid_raw, "time_grid", "t_max"), "time_grid.t_max"),
            points_per_decade=_as_int(
                grid_raw.get("points_per_decade", 16), "time_grid.points_per_decade"
            ),
        )
        if not 0 < grid.t_min < grid.t_max:
            raise ConfigError(
                "'time_grid.t_min' and 'time_grid.t_max' must satisfy 0 < t_min < t_max"
            )
        if grid.points_per_decade < 1:
            raise ConfigError("'time_grid.points_per_decade' must be at least 1")
        if kind in _TAIL_KINDS and grid.t_min <= t0:
            raise ConfigError(
                f"'time_grid.t_min' must exceed the source support t0 = {t0} "
                f"for kind = '{kind}', got {grid.t_min}"
            )
    elif kind != "mlf-table" and kind in _TAIL_KINDS:
        raise ConfigError(f"kind = '{kind}' requires a [time_grid] table")

    inv_raw = raw.get("inverse", {})
    inverse = InverseConfig(
        K=_as_int(inv_raw.get("K", 6), "inverse.K"),
        M=_as_int(inv_raw.get("M", 6), "inverse.M"),
        n_modes=_as_int(inv_raw.get("n_modes", 3), "inverse.n_modes"),
        noise_level=_as_float(inv_raw.get("noise_level", 0.0), "inverse.noise_level"),
    )
    if inverse.K < 1:
        raise ConfigError("'inverse.K' must be at least 1")
    if inverse.M < 0:
        raise ConfigError("'inverse.M' must be at least 0")
    if inverse.noise_level < 0:
        raise ConfigError("'inverse.noise_level' must be nonnegative")

    mlf_raw = raw.get("mlf", {})
    mlf_beta = (
        _as_float(mlf_raw["beta"], "mlf.beta") if "beta" in mlf_raw else None
    )
    if kind == "mlf-table":
        if mlf_beta is None:
            raise ConfigError("kind = 'mlf-table' requires 'mlf.beta'")
        if grid is None:
            raise ConfigError(
                "kind = 'mlf-table' requires a [time_grid] table (the argument grid)"
            )

    tol_raw = raw.get("tolerances", {})
    tolerances = {
        key: _as_float(val, f"tolerances.{key}") for key, val in tol_raw.items()
    }

    out_raw = raw.get("output", {})
    prefix = out_raw.get("prefix", "run")
    if not isinstance(prefix, str) or not prefix:
        raise ConfigError("'output.prefix' must be a non-empty string")

    if kind in ("extract", "uniqueness") and f_modal is None and f_profile is None:
        raise ConfigError(f"kind = '{kind}' requires 'source.f_modal' or 'source.f_profile'")
    if kind == "scalar" and not 0.0 < alpha < 1.0:
        raise ConfigError("kind = 'scalar' requires 'scenario.alpha' in (0, 1)")

    return Scenario(
        kind=kind,
        alpha=alpha,
        rng_seed=rng_seed,
        operator=operator,
        t0=t0,
        mu_segments=tuple(segments),
        f_modal=f_modal,
        f2_modal=f2_modal,
        f_profile=f_profile,
        regularity_sigma=regularity_sigma,
        offset=offset,
        engineered_mode=engineered_mode,
        observation=observation,
        grid=grid,
        inverse=inverse,
        mlf_beta=mlf_beta,
        tolerances=tolerances,
        output_prefix=prefix,
        digest=hashlib.sha256(text).hexdigest(),
    )


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file."""
    with open(path, "rb") as fh:
        text = fh.read()
    return parse_scenario(text, name=path)


def build_system(scenario: Scenario) -> EigenSystem:
    op = scenario.operator
    if op.kind == "laplacian":
        return laplacian_1d_dirichlet(op.length, n_modes=op.n_modes)
    a_vals = op.a_values or (1.0, 1.0)
    c_vals = op.c_values or (0.0, 0.0)
    xa = np.linspace(0.0, op.length, len(a_vals))
    xc = np.linspace(0.0, op.length, len(c_vals))

    def a_coeff(x):
        return np.interp(x, xa, a_vals)

    def c_coeff(x):
        return np.interp(x, xc, c_vals)

    return discretize_sturm_liouville(
        a_coeff, c_coeff, op.length, grid_size=op.grid_size, n_modes=op.n_modes
    )


def build_source(scenario: Scenario, system: EigenSystem | None = None) -> SourceSpec:
    if scenario.engineered_mode is not None:
        from .inverse import mu_with_vanishing_exp_integral

        if system is None:
            system = build_system(scenario)
        lam = float(system.eigenvalues[scenario.engineered_mode - 1])
        mu = mu_with_vanishing_exp_integral(lam, scenario.t0)
    else:
        mu = PiecewisePolynomial(
            tuple(
                PolySegment(lo, hi, coeffs) for lo, hi, coeffs in scenario.mu_segments
            )
        )
        if abs(mu.t0 - scenario.t0) > 1e-12 * scenario.t0:
            raise ConfigError(
                f"'source.mu_segments' end at {mu.t0}, but 'source.t0' = {scenario.t0}"
            )
    return SourceSpec(mu, scenario.t0)


def _named_function(name: str, length: float) -> Callable:
    if name == "one":
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    if name == "parabola":
        return lambda x: np.asarray(x, dtype=float) * (length - np.asarray(x, dtype=float))
    if name.startswith("mode:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad mode index in function name {name!r}") from None
        if n < 1:
            raise ConfigError(f"mode index must be positive in {name!r}")
        return lambda x: math.sqrt(2.0 / length) * np.sin(
            n * math.pi * np.asarray(x, dtype=float) / length
        )
    raise ConfigError(
        f"unknown function name {name!r}; use 'one', 'parabola', or 'mode:<n>'"
    )


def _modal_profile(
    coeffs: Sequence[float], system: EigenSystem, sigma: float
) -> SpatialProfile:
    padded = np.zeros(system.n_modes)
    arr = np.asarray(coeffs, dtype=float)
    if arr.size > system.n_modes:
        raise ConfigError(
            f"'source.f_modal' has {arr.size} entries but the operator keeps "
            f"{system.n_modes} modes"
        )
    padded[: arr.size] = arr
    return SpatialProfile(padded, sigma)


def build_profile(scenario: Scenario, system: EigenSystem) -> SpatialProfile | None:
    if scenario.f_modal is not None:
        return _modal_profile(scenario.f_modal, system, scenario.regularity_sigma)
    if scenario.f_profile is not None:
        fn = _named_function(scenario.f_profile, system.domain_length)
        return SpatialProfile(project(fn, system), scenario.regularity_sigma)
    return None


def build_second_profile(
    scenario: Scenario, system: EigenSystem
) -> SpatialProfile | None:
    if scenario.f2_modal is None:
        return None
    return _modal_profile(scenario.f2_modal, system, scenario.regularity_sigma)


def build_observation(
    scenario: Scenario, system: EigenSystem
) -> ObservationSpec | None:
    cfg = scenario.observation
    if cfg is None:
        return None
    if cfg.kind == "interior":
        tf_name = cfg.test_function or "mode:1"
        return ObservationSpec(
            kind="interior",
            region=cfg.region,
            test_function=_named_function(tf_name, system.domain_length),
        )
    point = cfg.point if cfg.point is not None else system.domain_length
    if point not in (0.0, system.domain_length):
        raise ConfigError(
            f"'observation.point' must be 0 or the domain length "
            f"{system.domain_length}, got {point}"
        )
    return ObservationSpec(
        kind="flux",
        region=(point,),
        endpoint_weights=(cfg.weight,),
    )


def build_time_grid(scenario: Scenario) -> np.ndarray:
    grid = scenario.grid
    if grid is None:
        raise ConfigError(f"kind = '{scenario.kind}' requires a [time_grid] table")
    n = max(
        int(round(math.log10(grid.t_max / grid.t_min) * grid.points_per_decade)), 1
    )
    return np.geomspace(grid.t_min, grid.t_max, n + 1)
