"""Scenario configuration: presets, flat ``key = value`` parsing and rendering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .medium import CollisionModel, RadioConfig
from .mobility import FlowSpec, RoadConfig
from .protocols import PROTOCOLS, DeferConfig
from .protocols.odamc import PROSE, PSEUDOCODE, RECEIVER, SENDER


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ConfigError):
    pass


class UnknownPreset(ConfigError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "unknown preset"


@dataclass(frozen=True)
class DeferSettings:
    # None ("auto"): twice the one-hop delay, airtime + range / prop_speed
    max_defer_time: float | None = 0.02
    epsilon: int = 2


@dataclass(frozen=True)
class ListSettings:
    l1_capacity: int = 64
    l0_capacity: int = 64


@dataclass(frozen=True)
class ProtocolSettings:
    name: str = "odam-c"
    p_fwd: float = 0.5
    angle_vertex: str = RECEIVER
    branch_polarity: str = PROSE


@dataclass(frozen=True)
class ScenarioConfig:
    vehicle_count: int = 100
    vehicular_gap: float = 200.0
    road: RoadConfig = field(default_factory=RoadConfig)
    flow1: FlowSpec = FlowSpec(120.0, 4.5, 1.0)
    flow2: FlowSpec = FlowSpec(70.0, 0.8, 4.5)
    speed_dev: float = 0.1
    mobility_dt: float = 0.5
    source_node: int | None = None          # None: vehicle nearest mid-road at first_send
    first_send: float = 600.0
    send_interval: float = 50.0
    last_send: float = 2000.0
    sim_end: float = 2100.0
    radio: RadioConfig = field(default_factory=RadioConfig)
    defer: DeferSettings = field(default_factory=DeferSettings)
    lists: ListSettings = field(default_factory=ListSettings)
    protocol: ProtocolSettings = field(default_factory=ProtocolSettings)
    seed: int = 1

    def defer_config(self) -> DeferConfig:
        mdt = self.defer.max_defer_time
        if mdt is None:
            mdt = 2.0 * self.radio.mean_delay()
        return DeferConfig(mdt, self.defer.epsilon, self.radio.range)

    def send_times(self) -> list[float]:
        n = int(math.floor((self.last_send - self.first_send) / self.send_interval + 1e-9)) + 1
        return [self.first_send + k * self.send_interval for k in range(n)]

    def with_overrides(self, **flat) -> ScenarioConfig:
        """Return a copy with flat dotted keys overridden (``protocol.p_fwd=1.0``)."""
        cfg = self
        for key, value in flat.items():
            key = key.replace("__", ".")
            if key not in KEYS:
                raise ValidationError(f"unknown key {key!r}")
            cfg = _set(cfg, KEYS[key][0], value)
        validate(cfg)
        return cfg


# ------------------------------------------------------------------- presets

_TABLE = {
    "scenario1": dict(vehicle_count=100, vehicular_gap=200.0, lane_count=4),
    "scenario2": dict(vehicle_count=200, vehicular_gap=100.0, lane_count=4),
    "scenario3": dict(vehicle_count=500, vehicular_gap=5.0, lane_count=3),
    # desk-scale dense scenario used for the trend checks
    "scenario3-small": dict(vehicle_count=120, vehicular_gap=5.0, lane_count=3,
                            road_length=3000.0),
}

PRESETS = tuple(_TABLE)


def preset(name: str) -> ScenarioConfig:
    try:
        row = dict(_TABLE[name])
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    road = RoadConfig(lane_count=row.pop("lane_count"),
                      road_length=row.pop("road_length", 22000.0))
    return ScenarioConfig(road=road, **row)


# -------------------------------------------------------------- key registry

def _opt_float(text: str):
    return None if text.strip().lower() in ("auto", "none", "") else float(text)


def _opt_int(text: str):
    return None if text.strip().lower() in ("auto", "none", "") else int(text)


def _choice(options):
    def parse(text: str):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _collision(text: str) -> CollisionModel:
    return CollisionModel(text)


# flat key -> (attribute path, parser)
KEYS = {
    "vehicle_count": ("vehicle_count", int),
    "vehicular_gap": ("vehicular_gap", float),
    "lane_count": ("road.lane_count", int),
    "road_length": ("road.road_length", float),
    "lane_width": ("road.lane_width", float),
    "min_gap": ("road.min_gap", float),
    "headway": ("road.headway", float),
    "flow1.speed_kmh": ("flow1.speed_kmh", float),
    "flow1.accel": ("flow1.accel", float),
    "flow1.decel": ("flow1.decel", float),
    "flow2.speed_kmh": ("flow2.speed_kmh", float),
    "flow2.accel": ("flow2.accel", float),
    "flow2.decel": ("flow2.decel", float),
    "speed_dev": ("speed_dev", float),
    "mobility_dt": ("mobility_dt", float),
    "source_node": ("source_node", _opt_int),
    "first_send": ("first_send", float),
    "send_interval": ("send_interval", float),
    "last_send": ("last_send", float),
    "sim_end": ("sim_end", float),
    "radio.range": ("radio.range", float),
    "radio.data_rate": ("radio.data_rate", float),
    "radio.packet_size": ("radio.packet_size", int),
    "radio.prop_speed": ("radio.prop_speed", float),
    "radio.collision_model": ("radio.collision_model", _collision),
    "radio.edge_loss": ("radio.edge_loss", float),
    "radio.edge_loss_start": ("radio.edge_loss_start", float),
    "defer.max_defer_time": ("defer.max_defer_time", _opt_float),
    "defer.epsilon": ("defer.epsilon", int),
    "lists.l1_capacity": ("lists.l1_capacity", int),
    "lists.l0_capacity": ("lists.l0_capacity", int),
    "protocol": ("protocol.name", _choice(PROTOCOLS)),
    "protocol.p_fwd": ("protocol.p_fwd", float),
    "protocol.angle_vertex": ("protocol.angle_vertex", _choice((RECEIVER, SENDER))),
    "protocol.branch_polarity": ("protocol.branch_polarity", _choice((PROSE, PSEUDOCODE))),
    "seed": ("seed", int),
}


def _get(obj, path: str):
    for part in path.split("."):
        obj = getattr(obj, part)
    return obj


def _set(obj, path: str, value):
    head, _, rest = path.partition(".")
    if not rest:
        try:
            return replace(obj, **{head: value})
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: {exc}") from None
    try:
        return replace(obj, **{head: _set(getattr(obj, head), rest, value)})
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{path}: {exc}") from None


def _render_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, CollisionModel):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(cfg: ScenarioConfig) -> str:
    """Serialise every key; ``parse(render(cfg)) == cfg``."""
    lines = [f"{key} = {_render_value(_get(cfg, path))}" for key, (path, _) in KEYS.items()]
    return "\n".join(lines) + "\n"


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    def need(cond, what):
        if not cond:
            raise ValidationError(what)

    need(cfg.vehicle_count >= 2, "vehicle_count must be >= 2")
    need(cfg.vehicular_gap > 0, "vehicular_gap must be > 0")
    for name in ("flow1", "flow2"):
        flow = getattr(cfg, name)
        need(flow.speed_kmh > 0, f"{name}.speed_kmh must be > 0")
        need(flow.accel > 0, f"{name}.accel must be > 0")
        need(flow.decel > 0, f"{name}.decel must be > 0")
    need(0.0 <= cfg.speed_dev < 1.0, "speed_dev must be in [0, 1)")
    need(cfg.mobility_dt > 0, "mobility_dt must be > 0")
    need(cfg.road.min_gap > 0, "min_gap must be > 0")
    need(cfg.road.headway >= 0, "headway must be >= 0")
    need(cfg.send_interval > 0, "send_interval must be > 0")
    need(0 <= cfg.first_send <= cfg.last_send <= cfg.sim_end,
         "need 0 <= first_send <= last_send <= sim_end")
    need(cfg.source_node is None or 0 <= cfg.source_node < cfg.vehicle_count,
         "source_node must be a vehicle id")
    need(cfg.defer.max_defer_time is None or cfg.defer.max_defer_time > 0,
         "defer.max_defer_time must be > 0")
    need(cfg.defer.epsilon >= 1, "defer.epsilon must be >= 1")
    need(cfg.lists.l1_capacity >= 1 and cfg.lists.l0_capacity >= 1,
         "list capacities must be >= 1")
    need(0.0 <= cfg.protocol.p_fwd <= 1.0, "protocol.p_fwd must be in [0, 1]")
    need(cfg.protocol.name in PROTOCOLS, f"protocol must be one of {', '.join(PROTOCOLS)}")
    per_lane = -(-cfg.vehicle_count // cfg.road.lane_count)
    need(cfg.vehicular_gap >= cfg.road.min_gap
         and (per_lane - 1) * cfg.vehicular_gap + cfg.road.min_gap <= cfg.road.road_length,
         "vehicles do not fit on the road at the given gap")
    return cfg


def parse(text: str) -> ScenarioConfig:
    entries = []
    base = None
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError(lineno, f"expected 'key = value', got {raw.strip()!r}")
        if key in seen:
            raise ParseError(lineno, f"duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        if key == "preset":
            try:
                base = preset(value)
            except UnknownPreset as exc:
                raise ParseError(lineno, str(exc)) from None
            continue
        if key not in KEYS:
            raise ParseError(lineno, f"unknown key {key!r}")
        path, conv = KEYS[key]
        try:
            entries.append((path, conv(value)))
        except ValueError as exc:
            raise ParseError(lineno, f"bad value for {key}: {exc}") from None
    cfg = base if base is not None else ScenarioConfig()
    for path, value in entries:
        cfg = _set(cfg, path, value)
    return validate(cfg)


def load(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
