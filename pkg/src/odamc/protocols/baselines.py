"""Reference protocols: blind flooding, probabilistic (WPBM) and distance-deferred (ODAM)."""

from __future__ import annotations

import logging

from ..geometry import Plane
from .base import (
    CancelTimer, DeferConfig, Drop, DuplicateOrigination, Forward, Packet, SetTimer,
    defer_time,
)

log = logging.getLogger(__name__)

DUPLICATE = Drop("duplicate")


class ProtocolNode:
    """Per-node protocol state; handlers return a list of actions."""

    name = "base"
    max_forwards = 1

    def __init__(self, node_id: int, plane: Plane | None = None):
        self.node_id = node_id
        self.plane = plane or Plane()
        self._originated: set = set()

    def _check_origination(self, packet: Packet) -> None:
        if packet.packet_id in self._originated:
            raise DuplicateOrigination(f"node {self.node_id} already sent {packet.label}")
        self._originated.add(packet.packet_id)

    def _distance(self, packet: Packet, self_pos, d):
        if d is None:
            d = self.plane.distance(self_pos, packet.hop_sender_pos)
        return d

    def timer_started(self, packet_id, ticket: int) -> None:
        raise NotImplementedError(f"{self.name} does not use timers")

    def on_timer_expiry(self, packet_id, ticket: int, now: float) -> list:
        raise NotImplementedError(f"{self.name} does not use timers")


class FloodingNode(ProtocolNode):
    name = "flooding"

    def __init__(self, node_id, plane=None):
        super().__init__(node_id, plane)
        self.seen: dict = {}

    def on_originate(self, packet, now, self_pos=None):
        self._check_origination(packet)
        self.seen[packet.packet_id] = packet
        return [Forward(packet)]

    def on_receive(self, packet, now, self_pos=None, d=None):
        if packet.packet_id in self.seen:
            return [DUPLICATE]
        self.seen[packet.packet_id] = packet
        return self._first_copy(packet)

    def _first_copy(self, packet):
        return [Forward(packet)]


class WpbmNode(FloodingNode):
    """Forward a first copy with a fixed probability; ``p_fwd = 1`` is flooding."""

    name = "wpbm"

    def __init__(self, node_id, plane=None, p_fwd: float = 0.5, rng=None):
        super().__init__(node_id, plane)
        if not 0.0 <= p_fwd <= 1.0:
            raise ValueError("p_fwd must be in [0, 1]")
        self.p_fwd = p_fwd
        self.rng = rng

    def _first_copy(self, packet):
        if self.rng.random() < self.p_fwd:
            return [Forward(packet)]
        return [Drop("not selected")]


class OdamNode(ProtocolNode):
    """Distance-deferred rebroadcast with suppression on any overheard duplicate."""

    name = "odam"

    def __init__(self, node_id, plane=None, defer: DeferConfig | None = None):
        super().__init__(node_id, plane)
        self.defer = defer or DeferConfig()
        # packet_id -> [packet, timer ticket or None]
        self.entries: dict = {}

    def on_originate(self, packet, now, self_pos=None):
        self._check_origination(packet)
        self.entries[packet.packet_id] = [packet, None]
        return [Forward(packet)]

    def on_receive(self, packet, now, self_pos=None, d=None):
        entry = self.entries.get(packet.packet_id)
        if entry is None:
            self.entries[packet.packet_id] = [packet, None]
            d = self._distance(packet, self_pos, d)
            return [SetTimer(packet.packet_id, defer_time(d, self.defer))]
        if entry[1] is not None:
            ticket, entry[1] = entry[1], None
            return [CancelTimer(packet.packet_id, ticket), Drop("suppressed")]
        return [DUPLICATE]

    def timer_started(self, packet_id, ticket):
        self.entries[packet_id][1] = ticket

    def on_timer_expiry(self, packet_id, ticket, now):
        entry = self.entries.get(packet_id)
        if entry is None or entry[1] != ticket:
            log.debug("node %s: stale timer for %s", self.node_id, packet_id)
            return []
        entry[1] = None
        return [Forward(entry[0])]
