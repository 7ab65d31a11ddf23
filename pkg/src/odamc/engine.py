"""Discrete-event core: clock, cancellable event queue and seeded RNG streams."""

from __future__ import annotations

import enum
import heapq
import zlib
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


class SchedulingInPast(ValueError):
    pass


class EventKind(enum.Enum):
    TX_START = "TxStart"
    TX_END = "TxEnd"
    RX = "Rx"
    TIMER_EXPIRY = "TimerExpiry"
    MOBILITY_TICK = "MobilityTick"
    TRAFFIC_SOURCE = "TrafficSource"


@dataclass(eq=False)
class Event:
    time: float
    seq: int
    kind: EventKind
    payload: Any = None
    cancelled: bool = field(default=False, repr=False)

    def __lt__(self, other: Event) -> bool:
        return (self.time, self.seq) < (other.time, other.seq)

    def trace_line(self) -> str:
        summary = self.payload.describe() if hasattr(self.payload, "describe") else (
            "" if self.payload is None else str(self.payload))
        return f"{self.time!r}\t{self.seq}\t{self.kind.value}\t{summary}"


class Engine:
    """Single-threaded event loop.

    Events are ordered by ``(time, seq)``; ``seq`` is assigned at scheduling
    time, so simultaneous events run in the order they were scheduled.
    The ticket returned by :meth:`schedule` is the event's ``seq``.
    """

    def __init__(self, handlers: dict[EventKind, Callable[[Event], None]] | None = None,
                 trace: Callable[[Event], None] | None = None):
        self.clock = 0.0
        self.handlers = dict(handlers or {})
        self.trace = trace
        self._heap: list[tuple[float, int, Event]] = []
        self._pending: dict[int, Event] = {}
        self._next_seq = 0
        self.processed = 0

    def on(self, kind: EventKind, handler: Callable[[Event], None]) -> None:
        self.handlers[kind] = handler

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> int:
        if time < self.clock:
            raise SchedulingInPast(f"event at t={time!r} is before clock t={self.clock!r}")
        seq = self._next_seq
        self._next_seq += 1
        ev = Event(float(time), seq, kind, payload)
        heapq.heappush(self._heap, (ev.time, seq, ev))
        self._pending[seq] = ev
        return seq

    def cancel(self, ticket: int | None) -> bool:
        ev = self._pending.pop(ticket, None) if ticket is not None else None
        if ev is None:
            return False
        ev.cancelled = True
        return True

    def is_pending(self, ticket: int | None) -> bool:
        return ticket in self._pending

    def __len__(self) -> int:
        return len(self._pending)

    def peek_time(self) -> float | None:
        heap = self._heap
        while heap and heap[0][2].cancelled:
            heapq.heappop(heap)
        return heap[0][0] if heap else None

    def run_until(self, t_end: float) -> int:
        """Process every pending event with ``time <= t_end``; return the count."""
        if t_end < self.clock:
            raise SchedulingInPast(f"run_until({t_end!r}) is before clock t={self.clock!r}")
        heap = self._heap
        pending = self._pending
        handlers = self.handlers
        trace = self.trace
        count = 0
        while heap and heap[0][0] <= t_end:
            _, seq, ev = heapq.heappop(heap)
            if ev.cancelled:
                continue
            del pending[seq]
            self.clock = ev.time
            if trace is not None:
                trace(ev)
            handler = handlers.get(ev.kind)
            if handler is not None:
                handler(ev)
            count += 1
        self.clock = float(t_end)
        self.processed += count
        return count


class RngStreams:
    """Family of independent generators keyed by a consumer label.

    Each label gets its own PCG64 stream derived from ``(seed, crc32(label))``,
    so adding a new consumer never shifts another consumer's draws.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._streams: dict[str, np.random.Generator] = {}

    def stream(self, label: str) -> np.random.Generator:
        gen = self._streams.get(label)
        if gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(zlib.crc32(label.encode()),))
            gen = np.random.Generator(np.random.PCG64(ss))
            self._streams[label] = gen
        return gen
