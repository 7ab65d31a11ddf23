from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Union

from ..geometry import Position


class OutOfRange(ValueError):
    pass


class DuplicateOrigination(ValueError):
    pass


class StaleTimer(LookupError):
    pass


@dataclass(frozen=True)
class Packet:
    """A broadcast data packet.

    ``packet_id`` is ``(origin, sequence)``.  ``hop_sender`` and
    ``hop_sender_pos`` describe the node that transmitted this particular copy
    and are rewritten at every hop.
    """
    packet_id: tuple[int, int]
    origin: int
    hop_sender: int
    hop_sender_pos: Position
    created_at: float

    @classmethod
    def originate(cls, origin: int, seq: int, pos, now: float) -> Packet:
        return cls((origin, seq), origin, origin, Position(*pos), now)

    def stamped(self, sender: int, pos) -> Packet:
        return replace(self, hop_sender=sender, hop_sender_pos=Position(*pos))

    @property
    def label(self) -> str:
        return f"{self.packet_id[0]}:{self.packet_id[1]}"


@dataclass(frozen=True)
class DeferConfig:
    max_defer_time: float = 0.02
    epsilon: int = 2
    range: float = 300.0

    def __post_init__(self):
        if not self.max_defer_time > 0:
            raise ValueError("max_defer_time must be > 0")
        if int(self.epsilon) != self.epsilon or self.epsilon < 1:
            raise ValueError("epsilon must be a positive integer")
        if not self.range > 0:
            raise ValueError("range must be > 0")


def defer_time(d: float, cfg: DeferConfig) -> float:
    """Rebroadcast delay for a receiver ``d`` metres from the sender.

    ``max_defer_time * (R**eps - d**eps) / R**eps``: zero at the range edge,
    ``max_defer_time`` next to the sender, so the farthest receiver fires first.
    """
    R = cfg.range
    if d < 0.0 or d > R:
        raise OutOfRange(f"distance {d!r} outside [0, {R!r}]")
    eps = int(cfg.epsilon)
    r_eps = R ** eps
    return cfg.max_defer_time * (r_eps - d ** eps) / r_eps


# -- actions returned by the receive/timer handlers

@dataclass(frozen=True)
class Forward:
    packet: Packet


@dataclass(frozen=True)
class SetTimer:
    packet_id: tuple[int, int]
    delay: float


@dataclass(frozen=True)
class CancelTimer:
    packet_id: tuple[int, int]
    ticket: int


@dataclass(frozen=True)
class Drop:
    reason: str = ""


Action = Union[Forward, SetTimer, CancelTimer, Drop]


class ProtocolName(str, enum.Enum):
    FLOODING = "flooding"
    WPBM = "wpbm"
    ODAM = "odam"
    ODAM_C = "odam-c"
