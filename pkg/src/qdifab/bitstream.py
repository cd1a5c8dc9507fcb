"""Bit-exact configuration serialization.

Per logic block, in placement order: the four LUT tables (64 bits each,
entry 0 first, input pin 0 as the least significant bit of the entry
index), then the programming points in fixed order: feedback selection for
input pins 0..3 (for each pin, LUTs 0..3), the two memory-point bypasses,
the two OR-bypass selectors and the output-grouping selector.  277 bits per
block, zero-padded to 280 and written as lowercase hex, one block per
line; the first bit of the stream is the most significant bit of the first
hex digit.

The pin and output wiring of each block travels in comment headers above
the hex lines, so a bitstream file is a complete, simulatable design.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .encodings import Protocol, SignalSpec
from .mapper import MappedGate, PlbUnit
from .plb import NC, LutTable, PlbConfig, WireRef
from .simulator import Fabric
from .trace import GateInfo

CONFIG_BITS = 4 * 64 + 16 + 2 + 2 + 1  # 277


class BitstreamError(ValueError):
    pass


def config_bits(config: PlbConfig) -> List[int]:
    bits: List[int] = []
    for lut in config.luts:
        bits.extend((lut.bits >> i) & 1 for i in range(64))
    for pin in range(4):
        for k in range(4):
            bits.append(1 if config.feedback_sel[k][pin] else 0)
    bits.extend(1 if b else 0 for b in config.mem_bypass)
    bits.extend(1 if b else 0 for b in config.or6_bypass_sel)
    bits.append(1 if config.combine_sel else 0)
    assert len(bits) == CONFIG_BITS
    return bits


def config_from_bits(bits: Sequence[int], assignment) -> PlbConfig:
    if len(bits) < CONFIG_BITS:
        raise BitstreamError(f"expected {CONFIG_BITS} bits, got {len(bits)}")
    pos = 0
    luts = []
    for _ in range(4):
        value = 0
        for i in range(64):
            value |= (bits[pos] & 1) << i
            pos += 1
        luts.append(LutTable(value))
    fb = [[False] * 6 for _ in range(4)]
    for pin in range(4):
        for k in range(4):
            fb[k][pin] = bool(bits[pos])
            pos += 1
    mem = (bool(bits[pos]), bool(bits[pos + 1]))
    pos += 2
    orb = (bool(bits[pos]), bool(bits[pos + 1]))
    pos += 2
    combine = bool(bits[pos])
    return PlbConfig(
        luts=tuple(luts),
        feedback_sel=tuple(tuple(r) for r in fb),
        mem_bypass=mem,
        or6_bypass_sel=orb,
        combine_sel=combine,
        input_assignment=assignment,
    )


def bits_to_hex(bits: Sequence[int]) -> str:
    padded = list(bits) + [0] * (-len(bits) % 4)
    digits = []
    for i in range(0, len(padded), 4):
        b0, b1, b2, b3 = padded[i : i + 4]
        digits.append(format((b0 << 3) | (b1 << 2) | (b2 << 1) | b3, "x"))
    return "".join(digits)


def hex_to_bits(text: str) -> List[int]:
    bits: List[int] = []
    for ch in text.strip():
        v = int(ch, 16)
        bits.extend(((v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1))
    return bits


def _ref_str(ref: Optional[WireRef]) -> str:
    if ref is NC or ref is None:
        return "-"
    return f"{ref.signal}:{ref.index}:{ref.width}"


def _ref_parse(tok: str) -> Optional[WireRef]:
    if tok == "-":
        return NC
    sig, idx, width = tok.rsplit(":", 2)
    return WireRef(sig, int(idx), int(width))


def write_bitstream(fabric: Fabric) -> str:
    lines = ["# qdifab-bitstream v1"]
    for name in sorted(fabric.signals):
        spec = fabric.signals[name]
        lines.append(
            f"# signal {name} proto={spec.protocol.value} arity={spec.arity}"
        )
    for g in fabric.gates:
        lines.append(
            f"# gate {g.name} proto={g.protocol} in={','.join(g.inputs)} "
            f"out={g.output} ack={int(g.ack)}"
        )
    hex_lines = []
    idx = 0
    for mg in fabric.mapped:
        for name, width in mg.internal_signals:
            lines.append(f"# internal {name} {width}")
        for unit in mg.plbs:
            ins = ";".join(_ref_str(r) for r in unit.config.input_assignment)
            outs = ";".join(_ref_str(r) for r in unit.output_map)
            souts = ";".join(s if s else "-" for s in unit.sout_map)
            lines.append(
                f"# plb {idx} gate={mg.name} role={unit.role} "
                f"in={ins} out={outs} sout={souts}"
            )
            hex_lines.append(bits_to_hex(config_bits(unit.config)))
            idx += 1
    return "\n".join(lines + hex_lines) + "\n"


def read_bitstream(text: str) -> Fabric:
    signals: dict[str, SignalSpec] = {}
    gates: List[GateInfo] = []
    internals: dict[str, List[Tuple[str, int]]] = {}
    plb_meta: List[dict] = []
    hex_lines: List[str] = []
    pending_internals: List[Tuple[str, int]] = []
    proto_by_name = {p.value: p for p in Protocol}

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            toks = line[1:].split()
            if not toks:
                continue
            tag = toks[0]
            if tag == "signal":
                kv = dict(t.split("=", 1) for t in toks[2:])
                signals[toks[1]] = SignalSpec(
                    toks[1], proto_by_name[kv["proto"]], int(kv["arity"])
                )
            elif tag == "gate":
                kv = dict(t.split("=", 1) for t in toks[2:])
                gates.append(GateInfo(
                    toks[1], kv["proto"], tuple(kv["in"].split(",")),
                    kv["out"], bool(int(kv["ack"])),
                ))
            elif tag == "internal":
                pending_internals.append((toks[1], int(toks[2])))
            elif tag == "plb":
                kv = dict(t.split("=", 1) for t in toks[2:])
                kv["_internals"] = pending_internals
                pending_internals = []
                plb_meta.append(kv)
        else:
            hex_lines.append(line)

    if len(hex_lines) != len(plb_meta):
        raise BitstreamError(
            f"{len(plb_meta)} block headers but {len(hex_lines)} hex lines"
        )

    by_gate: dict[str, List[PlbUnit]] = {}
    gate_internals: dict[str, Tuple[Tuple[str, int], ...]] = {}
    order: List[str] = []
    for meta, hx in zip(plb_meta, hex_lines):
        assignment = tuple(_ref_parse(t) for t in meta["in"].split(";"))
        if len(assignment) != 12:
            raise BitstreamError("block needs 12 input pin bindings")
        config = config_from_bits(hex_to_bits(hx), assignment)
        outs = tuple(_ref_parse(t) for t in meta["out"].split(";"))
        souts = tuple(None if t == "-" else t for t in meta["sout"].split(";"))
        unit = PlbUnit(meta["role"], config, outs, souts)
        gname = meta["gate"]
        if gname not in by_gate:
            by_gate[gname] = []
            order.append(gname)
        by_gate[gname].append(unit)
        if meta["_internals"]:
            gate_internals[gname] = tuple(meta["_internals"])

    proto_of = {g.name: g.protocol for g in gates}
    mapped = [
        MappedGate(
            name=gname,
            protocol=proto_by_name[proto_of.get(gname, "4ph")],
            plbs=tuple(by_gate[gname]),
            internal_signals=gate_internals.get(gname, ()),
        )
        for gname in order
    ]
    return Fabric(signals, mapped, gates)
