"""ODAM-C: distance-deferred rebroadcast with two LRU packet lists and an angle test.

A first copy of a packet goes to L1 with a defer timer.  A later copy from a
forwarder on the same side as the first sender (angle below 90 degrees) is
ignored and the timer keeps running.  A copy from the opposite side moves the
entry to L0 and restarts the timer once, as a second chance.  Any copy that
arrives while the entry sits in L0 stops that timer for good.  So a node
forwards a packet at most twice.
"""

from __future__ import annotations

import logging

from ..geometry import DegenerateVertex
from .base import CancelTimer, DeferConfig, Drop, Forward, SetTimer, defer_time
from .baselines import ProtocolNode
from .packet_list import PacketList, PacketListEntry

log = logging.getLogger(__name__)

RECEIVER = "receiver"
SENDER = "sender"
PROSE = "prose"
PSEUDOCODE = "pseudocode"


class OdamcNode(ProtocolNode):
    name = "odam-c"
    max_forwards = 2

    def __init__(self, node_id, plane=None, defer: DeferConfig | None = None,
                 l1_capacity: int = 64, l0_capacity: int = 64,
                 angle_vertex: str = RECEIVER, branch_polarity: str = PROSE,
                 record_angles: bool = False):
        super().__init__(node_id, plane)
        if angle_vertex not in (RECEIVER, SENDER):
            raise ValueError(f"angle_vertex must be {RECEIVER!r} or {SENDER!r}")
        if branch_polarity not in (PROSE, PSEUDOCODE):
            raise ValueError(f"branch_polarity must be {PROSE!r} or {PSEUDOCODE!r}")
        self.defer = defer or DeferConfig()
        self.l1 = PacketList("L1", l1_capacity)
        self.l0 = PacketList("L0", l0_capacity)
        self.angle_vertex = angle_vertex
        self.branch_polarity = branch_polarity
        # (packet_id, decision, angle) for every duplicate judged by the angle rule
        self.angle_log: list | None = [] if record_angles else None

    def entry(self, packet_id) -> PacketListEntry | None:
        return self.l1.get(packet_id) or self.l0.get(packet_id)

    def _insert(self, plist: PacketList, entry: PacketListEntry, now, actions) -> None:
        evicted = plist.insert(entry, now)
        if evicted is not None and evicted.timer is not None:
            actions.append(CancelTimer(evicted.packet_id, evicted.timer))
            evicted.timer = None

    @staticmethod
    def _stop(entry, actions) -> None:
        if entry.timer is not None:
            actions.append(CancelTimer(entry.packet_id, entry.timer))
            entry.timer = None

    def _record(self, pid, decision, theta) -> None:
        if self.angle_log is not None:
            self.angle_log.append((pid, decision, theta))

    def on_originate(self, packet, now, self_pos=None):
        self._check_origination(packet)
        if self_pos is None:
            self_pos = packet.hop_sender_pos
        actions = [Forward(packet)]
        entry = PacketListEntry(packet, tuple(self_pos), originated=True)
        self._insert(self.l1, entry, now, actions)
        return actions

    def angle(self, entry: PacketListEntry, packet, self_pos) -> float:
        if self.angle_vertex == RECEIVER:
            return self.plane.angle_at(self_pos, entry.first_sender_pos, packet.hop_sender_pos)
        return self.plane.angle_at(entry.first_sender_pos, self_pos, packet.hop_sender_pos)

    def on_receive(self, packet, now, self_pos=None, d=None):
        pid = packet.packet_id
        actions = []
        entry = self.l1.get(pid)
        if entry is None and pid not in self.l0:
            entry = PacketListEntry(packet, tuple(packet.hop_sender_pos))
            self._insert(self.l1, entry, now, actions)
            d = self._distance(packet, self_pos, d)
            actions.append(SetTimer(pid, defer_time(d, self.defer)))
            return actions

        if entry is None:
            # already heard from both sides
            entry = self.l0.get(pid)
            self._stop(entry, actions)
            self.l0.touch(pid, now)
            actions.append(Drop("in L0"))
            return actions

        self.l1.touch(pid, now)
        if entry.originated:
            # our own packet came back: no first sender to compare against
            theta = None
            same_side = False
        else:
            try:
                theta = self.angle(entry, packet, self_pos)
            except DegenerateVertex:
                log.debug("node %s: degenerate angle for %s, treating as 0", self.node_id, pid)
                theta = 0.0
            same_side = theta < 90.0

        if self.branch_polarity == PSEUDOCODE and same_side:
            self._record(pid, "stop", theta)
            self._stop(entry, actions)
            actions.append(Drop("same side"))
            return actions
        if same_side:
            self._record(pid, "ignore", theta)
            actions.append(Drop("same side"))
            return actions

        self._record(pid, "promote", theta)
        self._stop(entry, actions)
        self.l1.pop(pid)
        self._insert(self.l0, entry, now, actions)
        d = self._distance(packet, self_pos, d)
        actions.append(SetTimer(pid, defer_time(d, self.defer)))
        return actions

    def timer_started(self, packet_id, ticket):
        self.entry(packet_id).timer = ticket

    def on_timer_expiry(self, packet_id, ticket, now):
        entry = self.entry(packet_id)
        if entry is None or entry.timer != ticket:
            log.debug("node %s: stale timer for %s", self.node_id, packet_id)
            return []
        entry.timer = None
        return [Forward(entry.packet)]
