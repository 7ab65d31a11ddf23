"""Per-packet delivery ledger and the latency / PDR / redundancy metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path


class NoReceivers(ValueError):
    pass


COLUMNS = ("packet_id", "send_time_s", "pdr", "redundancy", "latency_s", "tx_count")


@dataclass
class PacketRecord:
    packet_id: tuple[int, int]
    origin: int
    sent_at: float
    node_count_at_send: int
    receptions: dict[int, float] = field(default_factory=dict)
    forwarders: set[int] = field(default_factory=set)
    tx_count: int = 0

    def on_rx(self, node: int, now: float) -> None:
        if node != self.origin and node not in self.receptions:
            self.receptions[node] = now

    def on_tx(self, node: int, initial: bool) -> None:
        self.tx_count += 1
        if not initial:
            self.forwarders.add(node)

    @property
    def label(self) -> str:
        return f"{self.packet_id[0]}:{self.packet_id[1]}"


def latency(rec: PacketRecord) -> float:
    """Mean first-reception delay over the nodes that got the packet."""
    if not rec.receptions:
        raise NoReceivers(f"packet {rec.label} reached nobody")
    return math.fsum(t - rec.sent_at for t in rec.receptions.values()) / len(rec.receptions)


def pdr(rec: PacketRecord) -> float:
    """Fraction of the other nodes that received the packet."""
    if rec.node_count_at_send < 2:
        raise ValueError("pdr needs at least two nodes")
    return len(rec.receptions) / (rec.node_count_at_send - 1)


def redundancy(rec: PacketRecord) -> float:
    """Fraction of all nodes that rebroadcast the packet (each counted once)."""
    if rec.node_count_at_send < 1:
        raise ValueError("redundancy needs at least one node")
    return len(rec.forwarders) / rec.node_count_at_send


@dataclass(frozen=True)
class Row:
    packet_id: str
    send_time: float | None
    pdr: float | None
    redundancy: float | None
    latency: float | None
    tx_count: float | None

    def cells(self) -> list[str]:
        return [self.packet_id] + [_cell(v) for v in
                                   (self.send_time, self.pdr, self.redundancy, self.latency,
                                    self.tx_count)]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _mean(values):
    vals = [v for v in values if v is not None]
    return math.fsum(vals) / len(vals) if vals else None


def row_for(rec: PacketRecord) -> Row:
    try:
        lat = latency(rec)
    except NoReceivers:
        lat = None
    return Row(rec.label, rec.sent_at, pdr(rec), redundancy(rec), lat, rec.tx_count)


def aggregate(records, group_by: str = "packet_id") -> tuple[list[Row], Row | None]:
    """Per-packet rows plus a summary row of column means.

    Undefined latencies are skipped when averaging.  Returns ``(rows, None)``
    for an empty input.
    """
    if group_by == "packet_id":
        key = lambda r: r.packet_id
    elif group_by == "send_time":
        key = lambda r: (r.sent_at, r.packet_id)
    else:
        raise ValueError(f"unknown group_by {group_by!r}")
    rows = [row_for(r) for r in sorted(records, key=key)]
    if not rows:
        return rows, None
    summary = Row("mean", None, _mean(r.pdr for r in rows), _mean(r.redundancy for r in rows),
                  _mean(r.latency for r in rows), _mean(float(r.tx_count) for r in rows))
    return rows, summary


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow(row.cells())
    return buf.getvalue()


def write_metrics(out_dir, records) -> tuple[list[Row], Row | None]:
    """Write ``metrics.csv`` and ``summary.csv`` into ``out_dir``."""
    out = Path(out_dir)
    rows, summary = aggregate(records)
    (out / "metrics.csv").write_text(to_csv(rows), encoding="utf-8")
    (out / "summary.csv").write_text(to_csv([summary] if summary else []), encoding="utf-8")
    return rows, summary


def read_metrics(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
