"""Unit-disk broadcast medium with an optional airtime-overlap collision model."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import Plane


class CollisionModel(enum.Enum):
    IDEAL = "ideal"
    AIRTIME_OVERLAP = "airtime-overlap"


@dataclass(frozen=True)
class RadioConfig:
    range: float = 300.0
    data_rate: float = 6.0e6
    packet_size: int = 8000
    prop_speed: float = 3.0e8
    collision_model: CollisionModel = CollisionModel.AIRTIME_OVERLAP
    # probabilistic loss near the range edge; off by default
    edge_loss: float = 0.0
    edge_loss_start: float = 0.8

    def __post_init__(self):
        if not self.range > 0:
            raise ValueError("radio range must be > 0")
        if not self.data_rate > 0:
            raise ValueError("data_rate must be > 0")
        if not self.packet_size > 0:
            raise ValueError("packet_size must be > 0")
        if not self.prop_speed > 0:
            raise ValueError("prop_speed must be > 0")
        if not 0.0 <= self.edge_loss <= 1.0:
            raise ValueError("edge_loss must be a probability")
        if not 0.0 <= self.edge_loss_start < 1.0:
            raise ValueError("edge_loss_start must be in [0, 1)")

    @property
    def airtime(self) -> float:
        return self.packet_size / self.data_rate

    def mean_delay(self) -> float:
        """One-hop delay at full range: airtime plus propagation."""
        return self.airtime + self.range / self.prop_speed


@dataclass
class Transmission:
    packet: object
    tx_node: int
    tx_pos: tuple
    start: float
    airtime: float


@dataclass
class Reception:
    """One frame arriving at one node; ``ticket`` is its pending Rx event."""
    node: int
    start: float
    end: float
    distance: float
    ticket: int | None = None
    voided: bool = False


def neighbors(tx_pos, xs, ys, radius: float, ring_length: float = 0.0, exclude: int = -1):
    """Indices and distances of nodes within ``radius`` of ``tx_pos`` (inclusive)."""
    return _kernels.neighbors(np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64),
                              float(tx_pos[0]), float(tx_pos[1]), float(radius),
                              float(ring_length), int(exclude))


class Medium:
    """Delivers frames to in-range nodes.

    ``schedule_rx(time, reception)`` must enqueue the Rx event and return its
    ticket; ``cancel(ticket)`` must void it.  Under the airtime-overlap model a
    node whose receptions overlap in time loses every overlapping frame.
    """

    def __init__(self, cfg: RadioConfig, plane: Plane | None = None, rng=None):
        self.cfg = cfg
        self.plane = plane or Plane()
        self.rng = rng
        self._busy: dict[int, list[Reception]] = {}
        self.collisions = 0
        self.edge_losses = 0

    def broadcast(self, tx: Transmission, fleet, schedule_rx, cancel) -> list[Reception]:
        cfg = self.cfg
        idx, dist = neighbors(tx.tx_pos, fleet.x, fleet.y, cfg.range,
                              self.plane.ring_length, tx.tx_node)
        overlap = cfg.collision_model is CollisionModel.AIRTIME_OVERLAP
        lost = None
        if cfg.edge_loss > 0.0 and idx.shape[0]:
            lost = self._edge_losses(dist)
        out = []
        for k, (node, d) in enumerate(zip(idx.tolist(), dist.tolist())):
            end = tx.start + tx.airtime + d / cfg.prop_speed
            rec = Reception(node, end - tx.airtime, end, d)
            if lost is not None and lost[k]:
                rec.voided = True
                self.edge_losses += 1
            if overlap:
                self._check_overlap(rec, tx.start, cancel)
            if not rec.voided:
                rec.ticket = schedule_rx(end, rec)
            out.append(rec)
        return out

    def _edge_losses(self, dist):
        cfg = self.cfg
        start = cfg.edge_loss_start * cfg.range
        frac = np.clip((dist - start) / (cfg.range - start), 0.0, 1.0)
        return self.rng.random(dist.shape[0]) < cfg.edge_loss * frac

    def _check_overlap(self, rec: Reception, now: float, cancel) -> None:
        busy = self._busy.get(rec.node)
        if busy is None:
            self._busy[rec.node] = [rec]
            return
        # frames finished before now cannot overlap anything scheduled from now on
        live = [r for r in busy if r.end > now]
        for r in live:
            if r.start < rec.end and rec.start < r.end:
                if not r.voided:
                    r.voided = True
                    cancel(r.ticket)
                    self.collisions += 1
                if not rec.voided:
                    rec.voided = True
                    self.collisions += 1
        live.append(rec)
        self._busy[rec.node] = live
