from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

from ..geometry import Position
from .base import Packet


@dataclass
class PacketListEntry:
    packet: Packet
    first_sender_pos: Position
    list: str = "L1"
    timer: int | None = None
    last_touch: float = 0.0
    originated: bool = False

    @property
    def packet_id(self):
        return self.packet.packet_id


class PacketList:
    """Bounded packet store with least-recently-used eviction.

    Insertion order doubles as recency order: :meth:`touch` moves an entry to
    the young end, eviction pops the old end.  Since simulation time never
    runs backwards this is the same as evicting the smallest ``last_touch``,
    with ties going to whichever entry was touched first.
    """

    def __init__(self, name: str, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.name = name
        self.capacity = int(capacity)
        self._entries: OrderedDict[tuple, PacketListEntry] = OrderedDict()

    def __contains__(self, packet_id) -> bool:
        return packet_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries.values())

    def get(self, packet_id) -> PacketListEntry | None:
        return self._entries.get(packet_id)

    def touch(self, packet_id, now: float) -> None:
        entry = self._entries[packet_id]
        entry.last_touch = now
        self._entries.move_to_end(packet_id)

    def insert(self, entry: PacketListEntry, now: float) -> PacketListEntry | None:
        """Insert (or refresh) ``entry``; return the evicted entry, if any.

        The caller owns cancelling the evicted entry's timer.
        """
        entry.list = self.name
        entry.last_touch = now
        pid = entry.packet_id
        self._entries[pid] = entry
        self._entries.move_to_end(pid)
        if len(self._entries) > self.capacity:
            _, evicted = self._entries.popitem(last=False)
            return evicted
        return None

    def pop(self, packet_id) -> PacketListEntry:
        return self._entries.pop(packet_id)

    def oldest(self) -> PacketListEntry | None:
        for entry in self._entries.values():
            return entry
        return None
