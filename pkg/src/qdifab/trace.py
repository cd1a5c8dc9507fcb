"""Simulation traces: ordered wire events plus transaction bookkeeping.

The CSV form is self contained: comment headers describe the signals and
gates so the property checkers can run on a file alone.  Event rows are
``time,wire,old,new``; a ``# transaction <signal> <index>`` marker line is
emitted when a signal completes a value/acknowledge cycle, and a
``# record`` line keeps the decoded value alongside it.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass(frozen=True)
class TraceEvent:
    time: int
    wire: str
    old: int
    new: int


@dataclass(frozen=True)
class SignalInfo:
    name: str
    protocol: str  # "4ph" | "ledr" | "edge"
    arity: int
    wires: Tuple[str, ...]


@dataclass(frozen=True)
class GateInfo:
    name: str
    protocol: str
    inputs: Tuple[str, ...]
    output: str
    ack: bool


@dataclass
class Trace:
    events: List[TraceEvent] = field(default_factory=list)
    # (time, signal, index): transaction `index` of `signal` completed.
    markers: List[Tuple[int, str, int]] = field(default_factory=list)
    # signal -> [(value, completion_time)] in transaction order.
    records: Dict[str, List[Tuple[int, int]]] = field(default_factory=dict)
    signals: Dict[str, SignalInfo] = field(default_factory=dict)
    gates: List[GateInfo] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)
    deadlock: bool = False
    meta: Dict[str, str] = field(default_factory=dict)

    def events_for(self, wires: Tuple[str, ...]) -> List[TraceEvent]:
        wset = set(wires)
        return [e for e in self.events if e.wire in wset]

    def values_of(self, signal: str) -> List[int]:
        return [v for v, _ in self.records.get(signal, [])]

    def end_time(self) -> int:
        last = 0
        if self.events:
            last = max(last, self.events[-1].time)
        if self.markers:
            last = max(last, max(m[0] for m in self.markers))
        return last

    # -- CSV ------------------------------------------------------------

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("# qdifab-trace v1\n")
        for k, v in sorted(self.meta.items()):
            out.write(f"# meta {k}={v}\n")
        for s in self.signals.values():
            out.write(
                f"# signal {s.name} proto={s.protocol} arity={s.arity} "
                f"wires={','.join(s.wires)}\n"
            )
        for g in self.gates:
            out.write(
                f"# gate {g.name} proto={g.protocol} in={','.join(g.inputs)} "
                f"out={g.output} ack={int(g.ack)}\n"
            )
        for d in self.diagnostics:
            out.write(f"# diagnostic {d}\n")
        if self.deadlock:
            out.write("# diagnostic deadlock\n")
        out.write("time,wire,old,new\n")

        # Merge events and markers chronologically, markers after the
        # events they conclude.
        ev = [(e.time, 0, i, e) for i, e in enumerate(self.events)]
        mk = [(t, 1, i, (t, sig, idx)) for i, (t, sig, idx) in enumerate(self.markers)]
        rec_by_marker = {}
        for sig, pairs in self.records.items():
            for idx, (value, t) in enumerate(pairs):
                rec_by_marker[(sig, idx)] = value
        for t, kind, _, item in sorted(ev + mk, key=lambda x: (x[0], x[1], x[2])):
            if kind == 0:
                e = item
                out.write(f"{e.time},{e.wire},{e.old},{e.new}\n")
            else:
                _, sig, idx = item
                out.write(f"# transaction {sig} {idx}\n")
                if (sig, idx) in rec_by_marker:
                    out.write(f"# record {sig} {idx} {rec_by_marker[(sig, idx)]} {t}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trace":
        tr = cls()
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                toks = line[1:].split()
                if not toks:
                    continue
                tag = toks[0]
                if tag == "meta" and len(toks) >= 2 and "=" in toks[1]:
                    k, v = toks[1].split("=", 1)
                    tr.meta[k] = v
                elif tag == "signal":
                    kv = dict(t.split("=", 1) for t in toks[2:])
                    tr.signals[toks[1]] = SignalInfo(
                        toks[1], kv["proto"], int(kv["arity"]),
                        tuple(kv["wires"].split(",")),
                    )
                elif tag == "gate":
                    kv = dict(t.split("=", 1) for t in toks[2:])
                    tr.gates.append(GateInfo(
                        toks[1], kv["proto"], tuple(kv["in"].split(",")),
                        kv["out"], bool(int(kv["ack"])),
                    ))
                elif tag == "transaction":
                    # Completion time is attached by the record line; keep a
                    # placeholder so marker order is preserved.
                    tr.markers.append((-1, toks[1], int(toks[2])))
                elif tag == "record":
                    sig, idx, value, t = toks[1], int(toks[2]), int(toks[3]), int(toks[4])
                    tr.records.setdefault(sig, []).append((value, t))
                    for i in range(len(tr.markers) - 1, -1, -1):
                        mt, msig, midx = tr.markers[i]
                        if msig == sig and midx == idx and mt == -1:
                            tr.markers[i] = (t, sig, idx)
                            break
                elif tag == "diagnostic":
                    text_d = " ".join(toks[1:])
                    if text_d == "deadlock":
                        tr.deadlock = True
                    else:
                        tr.diagnostics.append(text_d)
                continue
            if line.startswith("time,"):
                continue
            t, wire, old, new = line.split(",")
            tr.events.append(TraceEvent(int(t), wire, int(old), int(new)))
        return tr
