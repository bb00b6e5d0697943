"""Scenario configuration: a single JSON document, strictly validated."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .grid import GridSpec, Pose
from .ism import IsmParams
from .sensor import SensorSpec


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    extent_x: float = 2.0
    extent_y: float = 2.0
    voxel_size: float = 0.1
    origin: list | None = None


@dataclass
class SensorConfig:
    max_range: float = 1.0
    fov_deg: float = 28.0
    pixels: int = 15
    rate_hz: float = 10.0
    noise_var: float = 0.04


@dataclass
class RobotConfig:
    x: float = 0.0
    y: float = 0.0
    theta_deg: float = 90.0
    omega_deg_per_s: float = 15.0


@dataclass
class SimConfig:
    duration_s: float = 50.0
    seed: int = 0


@dataclass
class IsmConfig:
    r_ramp: float = 0.1
    r_top: float = 0.1
    q_l: float = 0.45
    q_h: float = 0.55


@dataclass
class MapperConfig:
    kind: str = "crm"
    bins: int = 101
    ism_params: IsmConfig = field(default_factory=IsmConfig)


@dataclass
class WorldConfig:
    seed: int = 0
    free_radius: float = 0.3


@dataclass
class NoiseSweepConfig:
    noise_vars: list = field(default_factory=lambda: [0.1, 0.04, 0.01, 0.0025, 0.0004, 0.0001])


@dataclass
class MonteCarloConfig:
    n_maps: int = 50


@dataclass
class PlanConfig:
    goal_x: float = 0.6
    goal_y: float = 0.6
    candidates: int = 10
    iterations: int = 2000
    variance_power: float = 1.0


@dataclass
class OracleConfig:
    trials: int = 200
    max_voxels: int = 8
    scans: int = 5
    lemma_worlds: int = 10
    lemma_voxels: int = 4


@dataclass
class ScenarioConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    sensor: SensorConfig = field(default_factory=SensorConfig)
    robot: RobotConfig = field(default_factory=RobotConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    mapper: MapperConfig = field(default_factory=MapperConfig)
    world: WorldConfig = field(default_factory=WorldConfig)
    noise_sweep: NoiseSweepConfig = field(default_factory=NoiseSweepConfig)
    montecarlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    plan: PlanConfig = field(default_factory=PlanConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def grid_spec(self) -> GridSpec:
        g = self.grid
        if g.origin is None:
            return GridSpec.centered(g.extent_x, g.extent_y, g.voxel_size)
        return GridSpec(g.extent_x, g.extent_y, g.voxel_size, tuple(g.origin))

    def sensor_spec(self, noise_var: float | None = None) -> SensorSpec:
        s = self.sensor
        return SensorSpec(
            max_range=s.max_range,
            fov=math.radians(s.fov_deg),
            pixels=s.pixels,
            rate=s.rate_hz,
            noise_var=s.noise_var if noise_var is None else noise_var,
        )

    def ism_params(self) -> IsmParams:
        p = self.mapper.ism_params
        return IsmParams(r_ramp=p.r_ramp, r_top=p.r_top, q_l=p.q_l, q_h=p.q_h)

    def start_pose(self) -> Pose:
        r = self.robot
        return Pose(r.x, r.y, math.radians(r.theta_deg))

    @property
    def n_scans(self) -> int:
        return int(round(self.sim.duration_s * self.sensor.rate_hz))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        cfg = from_dict(self.to_dict())
        cfg.sim.seed = seed
        cfg.world.seed = seed
        return cfg


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(f"{where}: unknown key")
        sub = known[key].default_factory if known[key].default_factory is not dataclasses.MISSING else None
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[key] = _build(sub, value, where)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def _positive(value, where: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{where}: must be a positive number, got {value!r}")


def _nonnegative(value, where: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
        raise ConfigError(f"{where}: must be a nonnegative number, got {value!r}")


def _integer(value, where: str, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{where}: must be an integer >= {minimum}, got {value!r}")


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    for name in ("extent_x", "extent_y", "voxel_size"):
        _positive(getattr(cfg.grid, name), f"grid.{name}")
    if cfg.grid.origin is not None and len(cfg.grid.origin) != 2:
        raise ConfigError("grid.origin: expected [x, y]")
    for name in ("max_range", "fov_deg", "rate_hz", "noise_var"):
        _positive(getattr(cfg.sensor, name), f"sensor.{name}")
    _integer(cfg.sensor.pixels, "sensor.pixels", 1)
    _nonnegative(cfg.sim.duration_s, "sim.duration_s")
    _integer(cfg.sim.seed, "sim.seed", 0)
    _integer(cfg.world.seed, "world.seed", 0)
    _nonnegative(cfg.world.free_radius, "world.free_radius")
    if cfg.mapper.kind not in ("crm", "ism"):
        raise ConfigError(f"mapper.kind: must be 'crm' or 'ism', got {cfg.mapper.kind!r}")
    _integer(cfg.mapper.bins, "mapper.bins", 2)
    for v in cfg.noise_sweep.noise_vars:
        _positive(v, "noise_sweep.noise_vars[]")
    _integer(cfg.montecarlo.n_maps, "montecarlo.n_maps", 1)
    _integer(cfg.plan.candidates, "plan.candidates", 1)
    _integer(cfg.plan.iterations, "plan.iterations", 1)
    _integer(cfg.oracle.trials, "oracle.trials", 1)
    _integer(cfg.oracle.max_voxels, "oracle.max_voxels", 1)
    _integer(cfg.oracle.scans, "oracle.scans", 0)
    _integer(cfg.oracle.lemma_worlds, "oracle.lemma_worlds", 0)
    _integer(cfg.oracle.lemma_voxels, "oracle.lemma_voxels", 1)
    try:
        cfg.grid_spec()
        cfg.sensor_spec()
        cfg.ism_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def from_dict(data: dict) -> ScenarioConfig:
    return validate(_build(ScenarioConfig, data, ""))


def load_config(path) -> ScenarioConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return from_dict(data)
