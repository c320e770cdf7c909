"""Experiment configuration: YAML schema, strict loading, system assembly.

A config names one driven system and the parameters of every pipeline
stage.  Loading is strict (unknown keys are errors) and lossless:
from_dict(to_dict(cfg)) == cfg, which keeps output manifests replayable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields, is_dataclass, replace
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError
from .maps import (DrivenSystem, Multiplier, baker_factor_map, doubling_map,
                   full_branch_linear_map, make_fiber,
                   shifted_cosine_multiplier, tripling_map)


@dataclass(frozen=True)
class SystemSpec:
    """Which driven system to build."""

    kind: str = "pc42"          # pc42 | t3 | baker | custom
    a: float = 8.0
    fiber: str = "arctan"       # arctan | rational | table
    r: float = 2.2              # baker: multiplier amplitude
    split: float = 0.45         # baker: factor partition point
    eps: float = 0.01           # baker: cosine floor offset
    breaks: tuple = ()          # custom: branch breakpoints incl. 0 and 1
    values: tuple = ()          # custom: per-cell multiplier values
    table: dict | None = None   # table fibre: {"x": [...], "y": [...]}
    label: str = ""


@dataclass(frozen=True)
class GraphParams:
    grid_size: int = 200_000
    depth: int = 60
    tol: float = 1e-10
    zero_floor: float = 1e-14
    chunk: int = 65536
    checkpoint_gap: int = 5


@dataclass(frozen=True)
class PressureParams:
    resolution: int = 4096
    mode: str = "auto"
    tol: float = 1e-9
    s_max: float = 64.0
    curve_points: int = 25


@dataclass(frozen=True)
class TailParams:
    points_per_decade: int = 24
    window: tuple | None = None


@dataclass(frozen=True)
class XiParams:
    points_per_decade: int = 24
    window: tuple | None = None


@dataclass(frozen=True)
class IndexParams:
    points: tuple = (0.0,)
    k_min: int = 1
    k_max: int = 14
    local_grid: int = 600_000
    base_depth: int = 80
    depth_per_rung: int = 4
    saturation: float = 0.25
    min_hits: int = 25


@dataclass(frozen=True)
class CheckParams:
    samples: int = 1000
    depths: tuple = (10, 30, 60)
    delta: float = 0.1
    conjugacy: bool = False
    conjugacy_samples: int = 1000
    conjugacy_depth: int = 40
    conjugacy_terms: int = 40
    conjugacy_u_coeff: float = 0.1
    conjugacy_floor: float = 1e-14


@dataclass(frozen=True)
class HypothesesParams:
    max_period: int = 8
    acim_resolution: int = 4096


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSpec = SystemSpec()
    graph: GraphParams = GraphParams()
    pressure: PressureParams = PressureParams()
    tail: TailParams = TailParams()
    xi: XiParams = XiParams()
    index: IndexParams = IndexParams()
    check: CheckParams = CheckParams()
    hypotheses: HypothesesParams = HypothesesParams()
    seed: int = 1234
    out_dir: str = "graphscale-out"
    formats: tuple = ("csv", "json", "png")


def _to_plain(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, tuple):
        return [_to_plain(v) for v in obj]
    return obj


def to_dict(cfg: ExperimentConfig) -> dict:
    return _to_plain(cfg)


def _coerce(cls, data, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    spec = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in spec:
            raise ConfigError(f"{path}.{key}: unknown field")
    kwargs = {}
    for name, f in spec.items():
        if name not in data:
            continue
        v = data[name]
        default = f.default
        try:
            if is_dataclass(default):
                v = _coerce(type(default), v, f"{path}.{name}")
            elif isinstance(default, bool):
                v = bool(v)
            elif isinstance(default, int):
                v = int(v)
            elif isinstance(default, float):
                if v is None:
                    raise ConfigError(f"{path}.{name}: must be a number")
                v = float(v)
            elif isinstance(v, list):
                v = tuple(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}.{name}: {exc}") from None
        kwargs[name] = v
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def from_dict(data: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    out = {}
    spec = {f.name: f for f in fields(ExperimentConfig)}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    for key in data:
        if key not in spec:
            raise ConfigError(f"config.{key}: unknown field")
    for name, f in spec.items():
        if name not in data:
            continue
        default = getattr(cfg, name)
        if is_dataclass(default):
            out[name] = _coerce(type(default), data[name], f"config.{name}")
        elif isinstance(default, bool):
            out[name] = bool(data[name])
        elif isinstance(default, int):
            out[name] = int(data[name])
        elif isinstance(default, float):
            out[name] = float(data[name])
        elif isinstance(data[name], list):
            out[name] = tuple(data[name])
        else:
            out[name] = data[name]
    return replace(cfg, **out)


def bundled_names() -> list:
    root = resources.files("graphscale") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(name_or_path: str) -> ExperimentConfig:
    """Read a config from a YAML path, or by bundled name (e.g. "pc42")."""
    p = Path(name_or_path)
    if p.exists():
        text = p.read_text(encoding="utf-8")
    else:
        stem = p.name[:-5] if p.name.endswith(".yaml") else p.name
        res = resources.files("graphscale") / "configs" / f"{stem}.yaml"
        if not res.is_file():
            raise ConfigError(
                f"no file {name_or_path!r} and no bundled config {stem!r} "
                f"(bundled: {', '.join(bundled_names())})")
        text = res.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error in {name_or_path}: {exc}") from None
    return from_dict(data or {})


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(to_dict(cfg), f, sort_keys=True)


def config_sha256(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(
        json.dumps(to_dict(cfg), sort_keys=True).encode()).hexdigest()


_KINDS = ("pc42", "t3", "baker", "custom")


def build_system(spec: SystemSpec) -> DrivenSystem:
    """Assemble the driven system a SystemSpec describes."""
    if spec.kind not in _KINDS:
        raise ConfigError(f"system.kind must be one of {_KINDS}, got {spec.kind!r}")
    fiber = make_fiber(spec.fiber, spec.a, spec.table)
    if spec.kind == "pc42":
        base = doubling_map()
        mult = Multiplier.piecewise(base, [4.0, 0.5])
    elif spec.kind == "t3":
        base = tripling_map()
        mult = Multiplier.piecewise(base, [9.0, 1.0 / 9.0, 3.0])
    elif spec.kind == "baker":
        base = baker_factor_map(spec.split)
        mult = shifted_cosine_multiplier(spec.r, spec.eps)
    else:
        if len(spec.breaks) < 3 or len(spec.values) != len(spec.breaks) - 1:
            raise ConfigError(
                "custom system needs breaks (>= 3 points) and one multiplier "
                "value per branch")
        base = full_branch_linear_map(spec.breaks)
        mult = Multiplier.piecewise(base, spec.values)
    return DrivenSystem(base, mult, fiber,
                        label=spec.label or spec.kind)
