"""Netlist text format and gate-to-block dispatch.

The format is line oriented and diff friendly:

    # comment
    signal <name> proto=<4ph|ledr|edge> arity=<n>
    gate <name> fn=<hex truth table> in=<sig,...> out=<sig> [ack]

The truth table is indexed in mixed radix with the first listed input as the
least significant digit.  Binary-output gates use one bit per entry (AND2 is
0x8, XOR2 is 0x6); ternary- and quaternary-output gates use two bits per
entry.  The ``ack`` flag requests an acknowledge input for four-phase gates;
LEDR and edge gates always consume one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

from .encodings import Protocol, SignalSpec
from . import mapper
from .mapper import MappedGate, MappingError, PlbUnit


class NetlistError(ValueError):
    """Parse or consistency error, carrying a line number."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column


_PROTO_NAMES = {"4ph": Protocol.FOUR_PHASE, "ledr": Protocol.LEDR, "edge": Protocol.EDGE}
PROTO_TO_NAME = {v: k for k, v in _PROTO_NAMES.items()}


@dataclass(frozen=True)
class GateDecl:
    name: str
    fn: int
    inputs: Tuple[str, ...]
    output: str
    ack: bool
    line: int = 0


@dataclass
class Netlist:
    signals: Dict[str, SignalSpec] = field(default_factory=dict)
    gates: List[GateDecl] = field(default_factory=list)

    def primary_inputs(self) -> List[str]:
        driven = {g.output for g in self.gates}
        used = {s for g in self.gates for s in g.inputs}
        return [s for s in self.signals if s not in driven and s in used]

    def primary_outputs(self) -> List[str]:
        used = {s for g in self.gates for s in g.inputs}
        return [s for s in self.signals if s not in used]


def _parse_kv(tok: str, line: int) -> Tuple[str, str]:
    if "=" not in tok:
        raise NetlistError(f"expected key=value, got {tok!r}", line)
    k, v = tok.split("=", 1)
    return k, v


def parse_netlist(text: str) -> Netlist:
    net = Netlist()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kind = toks[0]
        if kind == "signal":
            if len(toks) < 4:
                raise NetlistError("signal needs a name, proto= and arity=", lineno)
            name = toks[1]
            if name in net.signals:
                raise NetlistError(f"signal {name!r} declared twice", lineno)
            kv = dict(_parse_kv(t, lineno) for t in toks[2:])
            proto = kv.get("proto")
            if proto not in _PROTO_NAMES:
                raise NetlistError(f"unknown protocol {proto!r}", lineno)
            try:
                arity = int(kv.get("arity", ""))
            except ValueError:
                raise NetlistError("arity must be an integer", lineno) from None
            try:
                net.signals[name] = SignalSpec(name, _PROTO_NAMES[proto], arity)
            except ValueError as exc:
                raise NetlistError(str(exc), lineno) from None
        elif kind == "gate":
            if len(toks) < 5:
                raise NetlistError("gate needs a name, fn=, in= and out=", lineno)
            name = toks[1]
            ack = False
            kv = {}
            for t in toks[2:]:
                if t == "ack":
                    ack = True
                else:
                    k, v = _parse_kv(t, lineno)
                    kv[k] = v
            try:
                fn = int(kv["fn"], 16)
            except (KeyError, ValueError):
                raise NetlistError("gate needs fn=<hex>", lineno) from None
            if "in" not in kv or "out" not in kv:
                raise NetlistError("gate needs in=<sig,...> and out=<sig>", lineno)
            inputs = tuple(s for s in kv["in"].split(",") if s)
            net.gates.append(GateDecl(name, fn, inputs, kv["out"], ack, lineno))
        else:
            raise NetlistError(f"unknown directive {kind!r}", lineno, raw.index(kind) + 1)

    _check(net)
    return net


def _check(net: Netlist) -> None:
    drivers: Dict[str, str] = {}
    for g in net.gates:
        for s in (*g.inputs, g.output):
            if s not in net.signals:
                raise NetlistError(f"gate {g.name!r} references unknown signal {s!r}", g.line)
        if g.output in drivers:
            raise NetlistError(
                f"signal {g.output!r} driven by both {drivers[g.output]!r} and {g.name!r}",
                g.line,
            )
        drivers[g.output] = g.name
        protos = {net.signals[s].protocol for s in (*g.inputs, g.output)}
        if len(protos) > 1:
            raise NetlistError(f"gate {g.name!r} mixes protocols", g.line)

    # Data connections must form a DAG; rings would need explicitly declared
    # feedback, which this fabric does not expose.
    adj = {g.name: [drivers[s] for s in g.inputs if s in drivers] for g in net.gates}
    state: Dict[str, int] = {}

    def visit(v: str) -> None:
        state[v] = 1
        for u in adj[v]:
            if state.get(u) == 1:
                raise NetlistError(f"combinational cycle through gate {v!r}")
            if state.get(u, 0) == 0:
                visit(u)
        state[v] = 2

    for g in net.gates:
        if state.get(g.name, 0) == 0:
            visit(g.name)


def gate_function(gate: GateDecl, net: Netlist) -> Callable[..., int]:
    """Truth-table accessor over logical input values."""
    arities = [net.signals[s].arity for s in gate.inputs]
    out_arity = net.signals[gate.output].arity
    per_entry = 1 if out_arity == 2 else 2
    mask = (1 << per_entry) - 1

    def f(*vals: int) -> int:
        idx = 0
        scale = 1
        for v, a in zip(vals, arities):
            idx += v * scale
            scale *= a
        return (gate.fn >> (per_entry * idx)) & mask

    return f


def _wire_budget(gate: GateDecl, net: Netlist) -> int:
    wires = sum(net.signals[s].wire_count for s in gate.inputs)
    if gate.ack:
        wires += 1
    return wires


def map_gate(gate: GateDecl, net: Netlist) -> MappedGate:
    """Compile one netlist gate; errors name the gate."""
    specs = [net.signals[s] for s in gate.inputs]
    out_spec = net.signals[gate.output]
    proto = out_spec.protocol
    f = gate_function(gate, net)
    ack_wire = f"{gate.output}.ackin"

    try:
        if _wire_budget(gate, net) > 6 and proto is not Protocol.EDGE:
            raise MappingError(
                f"inputs and acknowledge need {_wire_budget(gate, net)} wires, 6 available"
            )
        if proto is Protocol.FOUR_PHASE:
            unit = _map_4ph(gate, specs, out_spec, f, ack_wire)
        elif proto is Protocol.LEDR:
            unit = _map_ledr(gate, specs, out_spec, f, ack_wire)
        else:
            return _map_edge(gate, specs, out_spec, f, ack_wire)
    except MappingError as exc:
        raise MappingError(f"gate {gate.name!r}: {exc}") from None
    return MappedGate(name=gate.name, protocol=proto, plbs=(unit,))


def _map_4ph(gate, specs, out_spec, f, ack_wire) -> PlbUnit:
    arities = [s.arity for s in specs]
    if arities == [2, 2] and out_spec.arity == 2:
        return mapper.map_4ph_2in(
            f, with_ack=gate.ack, inputs=(specs[0].name, specs[1].name),
            out=out_spec.name, ack=ack_wire,
        )
    if arities == [2, 2, 2] and out_spec.arity == 2:
        return mapper.map_4ph_3in(
            f, inputs=tuple(s.name for s in specs), out=out_spec.name,
            with_ack=gate.ack,
        )
    if arities == [3, 3] and out_spec.arity == 3:
        return mapper.map_4ph_ter_2in(
            f, inputs=(specs[0].name, specs[1].name), out=out_spec.name,
            with_ack=gate.ack,
        )
    raise MappingError(f"unsupported four-phase shape {arities} -> {out_spec.arity}")


def _map_ledr(gate, specs, out_spec, f, ack_wire) -> PlbUnit:
    arities = [s.arity for s in specs]
    if arities == [2, 2]:
        return mapper.map_ledr_2in(
            f, inputs=(specs[0].name, specs[1].name), out=out_spec.name, ack=ack_wire,
        )
    if arities == [2, 2, 2]:
        return mapper.map_ledr_3in(
            f, inputs=tuple(s.name for s in specs), out=out_spec.name, ack=ack_wire,
        )
    raise MappingError(f"unsupported LEDR shape {arities}")


def _map_edge(gate, specs, out_spec, f, ack_wire) -> MappedGate:
    arities = [s.arity for s in specs]
    if arities != [2, 2] or out_spec.arity != 2:
        raise MappingError(f"edge gates take two binary inputs, got {arities}")
    mg = mapper.map_edge_2in(
        f, inputs=(specs[0].name, specs[1].name), out=out_spec.name, ack=ack_wire,
        prefix=gate.name,
    )
    return MappedGate(name=gate.name, protocol=Protocol.EDGE, plbs=mg.plbs,
                      internal_signals=mg.internal_signals)


def map_netlist(net: Netlist) -> List[MappedGate]:
    return [map_gate(g, net) for g in net.gates]
