"""Wires engine, mobility, medium and protocol nodes into one run."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import Engine, EventKind, RngStreams
from .geometry import Plane, RingStrip
from .medium import CollisionModel, Medium, Reception, Transmission
from .metrics import PacketRecord
from .mobility import Fleet, PositionTrace, init_vehicles, mobility_step
from .protocols import CancelTimer, Forward, Packet, SetTimer, make_node
from .scenario import ScenarioConfig, validate


@dataclass(frozen=True)
class SourcePayload:
    node: int
    seq: int

    def describe(self):
        return f"node={self.node} seq={self.seq}"


@dataclass(frozen=True)
class TxPayload:
    node: int
    packet: Packet
    initial: bool = False

    def describe(self):
        return f"node={self.node} pkt={self.packet.label}" + (" initial" if self.initial else "")


@dataclass(frozen=True)
class RxPayload:
    reception: Reception
    packet: Packet

    def describe(self):
        return (f"node={self.reception.node} pkt={self.packet.label} "
                f"from={self.packet.hop_sender} d={self.reception.distance!r}")


@dataclass(frozen=True)
class TimerPayload:
    node: int
    packet_id: tuple

    def describe(self):
        return f"node={self.node} pkt={self.packet_id[0]}:{self.packet_id[1]}"


@dataclass(frozen=True)
class TickPayload:
    step: int

    def describe(self):
        return f"step={self.step}"


@dataclass
class RunResult:
    records: list[PacketRecord]
    source: int | None
    tx_counts: Counter
    nodes: list
    events: list[str] | None = None
    collisions: int = 0
    processed: int = 0
    extra: dict = field(default_factory=dict)

    def receivers(self, packet_index: int = 0) -> set[int]:
        return set(self.records[packet_index].receptions)


def build_fleet(cfg: ScenarioConfig, rngs: RngStreams) -> Fleet:
    return init_vehicles(cfg.vehicle_count, cfg.vehicular_gap, cfg.road, (cfg.flow1, cfg.flow2),
                         rngs.stream("mobility"), cfg.speed_dev)


class Simulation:
    """One (scenario, protocol, seed) run.

    Pass ``fleet`` with ``static=True`` to run on fixed hand-built positions in
    an unbounded plane; otherwise vehicles are generated from the scenario and
    move on a ring road with periodic mobility ticks.
    """

    def __init__(self, cfg: ScenarioConfig, *, fleet: Fleet | None = None, static: bool = False,
                 send_times=None, trace_events: bool = False, position_trace=None,
                 record_angles: bool = False):
        self.cfg = validate(cfg) if not static else cfg
        self.rngs = RngStreams(cfg.seed)
        self.static = static
        if fleet is None:
            fleet = build_fleet(cfg, self.rngs)
        self.fleet = fleet
        self.n = len(fleet)
        self.plane = Plane() if static else RingStrip(cfg.road.road_length)
        self.events: list[str] | None = [] if trace_events else None
        self.engine = Engine(trace=self._trace if trace_events else None)
        self.medium = Medium(cfg.radio, self.plane, self.rngs.stream("medium"))
        self.airtime = cfg.radio.airtime
        self.send_times = list(cfg.send_times() if send_times is None else send_times)
        self.source = cfg.source_node
        self.position_trace = PositionTrace(position_trace) if position_trace is not None else None

        defer = cfg.defer_config()
        proto = cfg.protocol
        wpbm_rng = self.rngs.stream("wpbm")
        self.nodes = [make_node(proto.name, i, self.plane, defer, p_fwd=proto.p_fwd, rng=wpbm_rng,
                                l1_capacity=cfg.lists.l1_capacity,
                                l0_capacity=cfg.lists.l0_capacity,
                                angle_vertex=proto.angle_vertex,
                                branch_polarity=proto.branch_polarity,
                                record_angles=record_angles)
                      for i in range(self.n)]
        self.records: dict[tuple, PacketRecord] = {}
        self.tx_counts: Counter = Counter()

        e = self.engine
        e.on(EventKind.TRAFFIC_SOURCE, self._on_source)
        e.on(EventKind.TX_START, self._on_tx_start)
        e.on(EventKind.RX, self._on_rx)
        e.on(EventKind.TIMER_EXPIRY, self._on_timer)
        e.on(EventKind.MOBILITY_TICK, self._on_tick)

    def _trace(self, ev) -> None:
        self.events.append(ev.trace_line())

    # -- event handlers

    def _on_source(self, ev) -> None:
        p: SourcePayload = ev.payload
        node = p.node if p.node >= 0 else self._pick_source()
        now = ev.time
        pos = self.fleet.position(node)
        packet = Packet.originate(node, p.seq, pos, now)
        self.records[packet.packet_id] = PacketRecord(packet.packet_id, node, now, self.n)
        self._apply(node, self.nodes[node].on_originate(packet, now, pos), now, initial=True)

    def _pick_source(self) -> int:
        if self.source is None:
            mid = 0.5 * self.cfg.road.road_length
            self.source = int(np.argmin(np.abs(self.fleet.x - mid)))
        return self.source

    def _on_tx_start(self, ev) -> None:
        p: TxPayload = ev.payload
        now = ev.time
        pos = self.fleet.position(p.node)
        packet = p.packet.stamped(p.node, pos)
        self.records[packet.packet_id].on_tx(p.node, p.initial)
        self.tx_counts[(p.node, packet.packet_id)] += 1
        tx = Transmission(packet, p.node, pos, now, self.airtime)
        engine = self.engine

        def schedule_rx(t, rec):
            return engine.schedule(t, EventKind.RX, RxPayload(rec, packet))

        self.medium.broadcast(tx, self.fleet, schedule_rx, engine.cancel)
        engine.schedule(now + self.airtime, EventKind.TX_END, p)

    def _on_rx(self, ev) -> None:
        p: RxPayload = ev.payload
        node = p.reception.node
        now = ev.time
        self.records[p.packet.packet_id].on_rx(node, now)
        actions = self.nodes[node].on_receive(p.packet, now, self.fleet.position(node),
                                              p.reception.distance)
        self._apply(node, actions, now)

    def _on_timer(self, ev) -> None:
        p: TimerPayload = ev.payload
        self._apply(p.node, self.nodes[p.node].on_timer_expiry(p.packet_id, ev.seq, ev.time),
                    ev.time)

    def _on_tick(self, ev) -> None:
        mobility_step(self.fleet, self.cfg.road, self.cfg.mobility_dt)
        if self.position_trace is not None:
            self.position_trace.write(ev.time, self.fleet)
        self._schedule_tick(ev.payload.step + 1)

    def _schedule_tick(self, step: int) -> None:
        t = step * self.cfg.mobility_dt
        if t <= self.cfg.sim_end:
            self.engine.schedule(t, EventKind.MOBILITY_TICK, TickPayload(step))

    def _apply(self, node: int, actions, now: float, initial: bool = False) -> None:
        engine = self.engine
        for a in actions:
            if isinstance(a, Forward):
                engine.schedule(now, EventKind.TX_START, TxPayload(node, a.packet, initial))
            elif isinstance(a, SetTimer):
                ticket = engine.schedule(now + a.delay, EventKind.TIMER_EXPIRY,
                                         TimerPayload(node, a.packet_id))
                self.nodes[node].timer_started(a.packet_id, ticket)
            elif isinstance(a, CancelTimer):
                engine.cancel(a.ticket)

    # -- driver

    def run(self) -> RunResult:
        src = -1 if self.source is None else self.source
        for seq, t in enumerate(self.send_times):
            self.engine.schedule(t, EventKind.TRAFFIC_SOURCE, SourcePayload(src, seq))
        if not self.static:
            if self.position_trace is not None:
                self.position_trace.write(0.0, self.fleet)
            self._schedule_tick(1)
        end = self.cfg.sim_end if not self.static else max(self.send_times, default=0.0) + 10.0
        self.engine.run_until(end)
        return RunResult(list(self.records.values()), self.source, self.tx_counts, self.nodes,
                         self.events, self.medium.collisions, self.engine.processed)


def run(cfg: ScenarioConfig, **kwargs) -> RunResult:
    return Simulation(cfg, **kwargs).run()


def run_static(positions, protocol: str, *, cfg: ScenarioConfig | None = None, source: int = 0,
               collision_model=None, **kwargs) -> RunResult:
    """Send one packet from ``source`` over parked nodes at ``positions``."""
    cfg = cfg or ScenarioConfig()
    radio = replace(cfg.radio, collision_model=collision_model or CollisionModel.IDEAL)
    cfg = replace(cfg, radio=radio, protocol=replace(cfg.protocol, name=protocol),
                  source_node=source)
    fleet = Fleet.static(positions)
    return Simulation(cfg, fleet=fleet, static=True, send_times=[0.0], **kwargs).run()


def transmissions_from_log(lines) -> Counter:
    """Count TxStart lines per (node, packet label) in an event trace."""
    counts: Counter = Counter()
    for line in lines:
        _, _, kind, summary = line.split("\t", 3)
        if kind != EventKind.TX_START.value:
            continue
        fields_ = dict(tok.split("=", 1) for tok in summary.split() if "=" in tok)
        counts[(int(fields_["node"]), fields_["pkt"])] += 1
    return counts
