"""Command-line runner: ``odamc run | sweep | replay-fig1``.

Exit codes: 0 success, 1 internal failure (or failed contrast / sweep cell),
2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from . import scenario as sc
from .medium import CollisionModel
from .metrics import COLUMNS, read_metrics, write_metrics
from .protocols import PROTOCOLS
from .simulation import Simulation, run_static

log = logging.getLogger("odamc")

FIG1 = {"A": (0.0, 0.0), "B": (-160.0, 0.0), "C": (130.0, 0.0), "D": (420.0, 0.0)}


class UsageError(Exception):
    pass


def parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise UsageError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def _common(p: argparse.ArgumentParser, protocol=True) -> None:
    p.add_argument("--config", type=Path, help="scenario file (key = value lines)")
    p.add_argument("--preset", choices=sc.PRESETS, help="start from a built-in scenario")
    if protocol:
        p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--seed", type=int)
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key; repeatable")
    p.add_argument("--angle-vertex", choices=("receiver", "sender"))
    p.add_argument("--branch-polarity", choices=("prose", "pseudocode"))
    p.add_argument("--collision-model", choices=[m.value for m in CollisionModel])
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odamc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one simulation")
    _common(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--trace-events", action="store_true", help="write events.log")
    p.add_argument("--trace-positions", action="store_true", help="write positions.csv")

    p = sub.add_parser("sweep", help="protocols x seeds, plus comparison.csv")
    _common(p)
    p.add_argument("--protocols", default=",".join(PROTOCOLS),
                   help="comma-separated protocol list")
    p.add_argument("--seeds", default="1..5", help="'a..b' (inclusive) or 'a,b,c'")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--trace-events", action="store_true")

    p = sub.add_parser("replay-fig1", help="four-node interference geometry, ODAM vs ODAM-C")
    _common(p)
    p.add_argument("--out", type=Path)
    return parser


def load_config(args) -> sc.ScenarioConfig:
    if args.config is not None:
        text = args.config.read_text(encoding="utf-8")
        if args.preset:
            text = f"preset = {args.preset}\n" + text
        cfg = sc.parse(text)
    else:
        cfg = sc.preset(args.preset or "scenario1")
    flat = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key = key.strip()
        if key not in sc.KEYS:
            raise sc.ValidationError(f"unknown key {key!r}")
        try:
            flat[key] = sc.KEYS[key][1](value.strip())
        except ValueError as exc:
            raise sc.ValidationError(f"bad value for {key}: {exc}") from None
    for key, attr in (("protocol", "protocol"), ("seed", "seed"),
                      ("protocol.angle_vertex", "angle_vertex"),
                      ("protocol.branch_polarity", "branch_polarity")):
        value = getattr(args, attr, None)
        if value is not None:
            flat[key] = value
    if getattr(args, "collision_model", None):
        flat["radio.collision_model"] = CollisionModel(args.collision_model)
    return cfg.with_overrides(**flat) if flat else sc.validate(cfg)


def run_one(cfg: sc.ScenarioConfig, out: Path, trace_events=False, trace_positions=False):
    out.mkdir(parents=True, exist_ok=True)
    pos_fh = open(out / "positions.csv", "w", encoding="utf-8", newline="") \
        if trace_positions else None
    try:
        result = Simulation(cfg, trace_events=trace_events, position_trace=pos_fh).run()
    finally:
        if pos_fh is not None:
            pos_fh.close()
    write_metrics(out, result.records)
    (out / "config.txt").write_text(sc.render(cfg), encoding="utf-8")
    if trace_events:
        (out / "events.log").write_text("\n".join(result.events) + "\n", encoding="utf-8")
    return result


def cmd_run(args) -> int:
    cfg = load_config(args)
    result = run_one(cfg, args.out, args.trace_events, args.trace_positions)
    log.info("%s: %d packets, source node %s", cfg.protocol.name, len(result.records),
             result.source)
    return 0


def _float(cell: str):
    return float(cell) if cell != "" else None


def comparison_rows(cells: dict[str, list[Path]]) -> list[list[str]]:
    """Per-protocol, per-packet means over the metrics files of each cell."""
    out = []
    for proto, dirs in cells.items():
        per_packet: dict[int, list[dict]] = {}
        for d in dirs:
            for k, row in enumerate(read_metrics(d / "metrics.csv")):
                per_packet.setdefault(k, []).append(row)
        for k in sorted(per_packet):
            rows = per_packet[k]
            means = []
            for col in COLUMNS[1:]:
                vals = [_float(r[col]) for r in rows]
                vals = [v for v in vals if v is not None]
                means.append(repr(math.fsum(vals) / len(vals)) if vals else "")
            out.append([proto, str(k)] + means + [str(len(rows))])
    return out


def cmd_sweep(args) -> int:
    seeds = parse_seeds(args.seeds)
    if not seeds:
        raise UsageError("no seeds given")
    protocols = [p.strip() for p in args.protocols.split(",") if p.strip()]
    if not protocols:
        raise UsageError("no protocols given")
    for p in protocols:
        if p not in PROTOCOLS:
            raise UsageError(f"unknown protocol {p!r}")
    if args.protocol:
        raise UsageError("use --protocols with sweep")
    base = load_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    done: dict[str, list[Path]] = {p: [] for p in protocols}
    failed = 0
    for proto in protocols:
        for seed in seeds:
            cell = args.out / f"{proto}_seed{seed}"
            cfg = replace(base, seed=seed, protocol=replace(base.protocol, name=proto))
            try:
                run_one(cfg, cell, args.trace_events)
            except Exception:
                failed += 1
                cell.mkdir(parents=True, exist_ok=True)
                (cell / "FAILED").write_text(traceback.format_exc(), encoding="utf-8")
                log.error("cell %s failed", cell.name)
                continue
            done[proto].append(cell)
            log.info("done %s", cell.name)
    with open(args.out / "comparison.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("protocol", "packet") + COLUMNS[1:] + ("runs",))
        w.writerows(comparison_rows(done))
    return 1 if failed else 0


def replay_fig1(cfg: sc.ScenarioConfig, collision_model=None) -> dict[str, dict]:
    names = list(FIG1)
    positions = [FIG1[n] for n in names]
    report = {}
    for proto in ("odam", "odam-c"):
        res = run_static(positions, proto, cfg=cfg, source=0, collision_model=collision_model)
        received = {names[i] for i in res.receivers()}
        tx = {names[node]: c for (node, _), c in res.tx_counts.items()}
        report[proto] = {"received": received, "tx": tx}
    return report


def cmd_replay_fig1(args) -> int:
    if args.protocol is not None:
        raise UsageError("replay-fig1 always compares odam and odam-c; drop --protocol")
    cfg = load_config(args)
    cm = CollisionModel(args.collision_model) if args.collision_model else None
    report = replay_fig1(cfg, cm)
    for proto, r in report.items():
        got = ", ".join(sorted(r["received"])) or "-"
        missed = ", ".join(sorted(set("BCD") - r["received"])) or "-"
        fwd = ", ".join(f"{k}x{v}" for k, v in sorted(r["tx"].items()))
        print(f"{proto:7s} received: {got:8s} unreached: {missed:6s} transmissions: {fwd}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        with open(args.out / "fig1.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("protocol", "node", "x", "received", "transmissions"))
            for proto, r in report.items():
                for name, (x, _) in FIG1.items():
                    w.writerow((proto, name, repr(x), int(name in r["received"]),
                                r["tx"].get(name, 0)))
    ok = "D" not in report["odam"]["received"] and "D" in report["odam-c"]["received"]
    print("contrast holds" if ok else "contrast does NOT hold")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "replay-fig1": cmd_replay_fig1}[args.command]
    try:
        return handler(args)
    except (sc.ConfigError, UsageError, OSError) as exc:
        print(f"odamc: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
