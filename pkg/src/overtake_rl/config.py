"""Run configuration: one object for every tunable, a `key = value` file
format with dotted sections, and a canonical rendering for provenance.

Every field has a default; unknown keys are rejected by name. The fully
resolved config is echoed into each run's output directory so results are
reproducible from the artifacts alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .baseline import BaselineConfig
from .dqn import ObsConfig, RewardConfig, TrainConfig
from .planner import PlannerConfig
from .scenarios import ParameterRanges
from .world import KinematicLimits, RoadModel

__all__ = ["ConfigError", "VehicleConfig", "SimConfig", "RunConfig", "parse_config", "render_config", "load_config"]


class ConfigError(ValueError):
    """A configuration file or flag value is invalid."""


@dataclass(frozen=True)
class VehicleConfig:
    length: float = 4.0
    width: float = 1.8
    start_speed: float = 3.0


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05
    decision_period_steps: int = 10  # 0.5 s between high-level decisions

    def __post_init__(self):
        if self.dt <= 0 or self.decision_period_steps < 1:
            raise ConfigError("sim.dt must be > 0 and decision_period_steps >= 1")


@dataclass(frozen=True)
class RunConfig:
    road: RoadModel = field(default_factory=RoadModel)
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    vehicle: VehicleConfig = field(default_factory=VehicleConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    obs: ObsConfig = field(default_factory=ObsConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    ranges: ParameterRanges = field(default_factory=ParameterRanges)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    seed: int = 0

    def __post_init__(self):
        if self.planner.lane_width != self.road.lane_width:
            raise ConfigError(
                f"planner.lane_width ({self.planner.lane_width}) must equal "
                f"road.lane_width ({self.road.lane_width})"
            )


_SECTIONS = {
    "road": RoadModel,
    "limits": KinematicLimits,
    "vehicle": VehicleConfig,
    "sim": SimConfig,
    "planner": PlannerConfig,
    "obs": ObsConfig,
    "reward": RewardConfig,
    "train": TrainConfig,
    "ranges": ParameterRanges,
    "baseline": BaselineConfig,
}


def _coerce(raw: str, typ, key: str):
    raw = raw.strip()
    if typ is float:
        return float(raw)
    if typ is int:
        return int(raw)
    if typ is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if typ in (tuple, "tuple[int, ...]", tuple[int, ...]):
        return tuple(int(tok) for tok in raw.split(",") if tok.strip())
    raise ConfigError(f"{key}: unsupported field type {typ!r}")


def _field_types(cls) -> dict:
    out = {}
    for f in fields(cls):
        typ = str(f.type)
        if typ == "float":
            out[f.name] = float
        elif typ == "int":
            out[f.name] = int
        elif typ == "bool":
            out[f.name] = bool
        elif typ.startswith("tuple"):
            out[f.name] = tuple
        else:
            raise ConfigError(f"{cls.__name__}.{f.name}: unsupported config field type {typ}")
    return out


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse `section.key = value` lines over ``base`` (defaults if None).

    Blank lines and '#' comments are ignored; unknown sections or keys are
    rejected with the offending name.
    """
    cfg = base or RunConfig()
    overrides: dict[str, dict] = {}
    seed = cfg.seed
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key == "seed":
            seed = int(raw)
            continue
        if "." not in key:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        section, name = key.split(".", 1)
        if section not in _SECTIONS:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        types = _field_types(_SECTIONS[section])
        if name not in types:
            raise ConfigError(f"line {lineno}: unknown key {name!r} in section {section!r}")
        overrides.setdefault(section, {})[name] = _coerce(raw, types[name], key)

    try:
        parts = {}
        for section in _SECTIONS:
            current = getattr(cfg, section)
            if section in overrides:
                current = replace(current, **overrides[section])
            parts[section] = current
        return RunConfig(seed=seed, **parts)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


def render_config(cfg: RunConfig) -> str:
    """Canonical text form of the resolved config (field declaration order)."""
    lines = [f"seed = {cfg.seed}"]
    for section in _SECTIONS:
        obj = getattr(cfg, section)
        lines.append("")
        for f in fields(obj):
            value = getattr(obj, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{section}.{f.name} = {value}")
    return "\n".join(lines) + "\n"
