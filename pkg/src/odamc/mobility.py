"""Two-flow traffic on a straight one-way multi-lane ring road.

Vehicle state is kept as parallel numpy arrays (:class:`Fleet`) so the
per-tick update runs in a compiled kernel; :class:`Vehicle` is a read-only
snapshot of one row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import Position

KMH = 1000.0 / 3600.0


class CapacityExceeded(ValueError):
    pass


@dataclass(frozen=True)
class FlowSpec:
    speed_kmh: float
    accel: float
    decel: float

    @property
    def speed(self) -> float:
        return self.speed_kmh * KMH


@dataclass(frozen=True)
class RoadConfig:
    lane_count: int = 4
    road_length: float = 22000.0
    lane_width: float = 3.5
    min_gap: float = 2.0
    headway: float = 1.0

    def __post_init__(self):
        if self.lane_count < 1:
            raise ValueError("lane_count must be >= 1")
        if not self.road_length > 0:
            raise ValueError("road_length must be > 0")

    def lane_center(self, lane: int) -> float:
        return (lane + 0.5) * self.lane_width


@dataclass(frozen=True)
class Vehicle:
    id: int
    lane: int
    pos: Position
    speed: float
    flow: int
    target_speed: float
    accel: float
    decel: float


class Fleet:
    """Struct-of-arrays vehicle table indexed by node id."""

    def __init__(self, x, y, lane, speed, flow, target, accel, decel):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.lane = np.ascontiguousarray(lane, dtype=np.int64)
        self.speed = np.ascontiguousarray(speed, dtype=np.float64)
        self.flow = np.ascontiguousarray(flow, dtype=np.int64)
        self.target = np.ascontiguousarray(target, dtype=np.float64)
        self.accel = np.ascontiguousarray(accel, dtype=np.float64)
        self.decel = np.ascontiguousarray(decel, dtype=np.float64)

    @classmethod
    def static(cls, positions) -> Fleet:
        """Parked nodes at fixed positions (used for hand-built topologies)."""
        pts = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        n = pts.shape[0]
        zeros = np.zeros(n)
        return cls(pts[:, 0], pts[:, 1], np.zeros(n, np.int64), zeros, np.zeros(n, np.int64),
                   zeros, zeros, zeros)

    def __len__(self) -> int:
        return self.x.shape[0]

    def position(self, i: int) -> Position:
        return Position(float(self.x[i]), float(self.y[i]))

    def vehicle(self, i: int) -> Vehicle:
        return Vehicle(i, int(self.lane[i]), self.position(i), float(self.speed[i]),
                       int(self.flow[i]) + 1, float(self.target[i]), float(self.accel[i]),
                       float(self.decel[i]))

    def vehicles(self) -> list[Vehicle]:
        return [self.vehicle(i) for i in range(len(self))]

    def copy(self) -> Fleet:
        return Fleet(self.x.copy(), self.y.copy(), self.lane.copy(), self.speed.copy(),
                     self.flow.copy(), self.target.copy(), self.accel.copy(), self.decel.copy())


def init_vehicles(count: int, gap: float, road: RoadConfig, flows: tuple[FlowSpec, FlowSpec],
                  rng: np.random.Generator | None = None, speed_dev: float = 0.0) -> Fleet:
    """Place ``count`` vehicles round-robin over the lanes.

    Vehicle ``i`` goes to lane ``i % lane_count`` at ``x = (i // lane_count) * gap``;
    even ids belong to flow 1, odd ids to flow 2.  Each vehicle's desired speed
    is its flow speed scaled by a factor drawn uniformly from
    ``[1 - speed_dev, 1]``; with ``speed_dev = 0`` no draws are made.  Initial
    speed equals the desired speed.
    """
    if count < 1:
        raise ValueError("need at least one vehicle")
    per_lane = -(-count // road.lane_count)
    if gap < road.min_gap or (per_lane - 1) * gap + road.min_gap > road.road_length:
        raise CapacityExceeded(
            f"{count} vehicles at gap {gap} m do not fit on {road.lane_count} x "
            f"{road.road_length} m with min_gap {road.min_gap} m")
    ids = np.arange(count)
    lane = ids % road.lane_count
    x = (ids // road.lane_count) * float(gap)
    y = (lane + 0.5) * road.lane_width
    flow = ids % 2
    base = np.where(flow == 0, flows[0].speed, flows[1].speed)
    if speed_dev > 0.0:
        if rng is None:
            raise ValueError("speed_dev > 0 needs an rng")
        factor = 1.0 - speed_dev * rng.random(count)
    else:
        factor = np.ones(count)
    target = base * factor
    accel = np.where(flow == 0, flows[0].accel, flows[1].accel)
    decel = np.where(flow == 0, flows[0].decel, flows[1].decel)
    return Fleet(x, y, lane, target.copy(), flow, target, accel, decel)


def mobility_step(fleet: Fleet, road: RoadConfig, dt: float, kernel=None) -> Fleet:
    """Advance every vehicle by ``dt`` seconds, in place.

    A vehicle whose same-lane leader is closer than ``min_gap + speed * headway``
    tries the left then the right adjacent lane; failing that it brakes towards
    the leader's speed.  Otherwise it accelerates towards its desired speed.
    Positions wrap at ``road_length``.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    kernel = kernel or _kernels.mobility_kernel
    kernel(fleet.x, fleet.y, fleet.lane, fleet.speed, fleet.target, fleet.accel, fleet.decel,
           int(road.lane_count), float(road.road_length), float(road.lane_width),
           float(road.min_gap), float(road.headway), float(dt))
    return fleet


class PositionTrace:
    """CSV writer for ``time,node_id,x,y,speed,lane`` rows."""

    header = ("time", "node_id", "x", "y", "speed", "lane")

    def __init__(self, fh):
        self._w = csv.writer(fh, lineterminator="\n")
        self._w.writerow(self.header)

    def write(self, t: float, fleet: Fleet) -> None:
        rows = zip(fleet.x.tolist(), fleet.y.tolist(), fleet.speed.tolist(), fleet.lane.tolist())
        self._w.writerows((repr(t), i, repr(x), repr(y), repr(v), ln)
                          for i, (x, y, v, ln) in enumerate(rows))
