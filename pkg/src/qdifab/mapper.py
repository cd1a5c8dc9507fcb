"""Compilation of logical gates onto the programmable logic block.

Each mapping routine turns a truth function plus a protocol choice into LUT
tables, programming points and a pin assignment.  The conventions:

* Four-phase gates fire when every data input has left NULL and the
  acknowledge input (when present) is 0, and return to NULL when every input
  is NULL and the acknowledge is 1.  Two-input gates keep the memory points
  transparent and hold their outputs through the LUTs' own feedback; wider
  gates use the memory-point C-elements with the 6-input OR as the
  return-to-NULL companion, which leaves no wire budget for an acknowledge
  input.
* LEDR gates fire when both input phases agree and oppose the acknowledge.
* Edge gates take two blocks: a 2x2 decision-wait that decodes input
  transitions into one of four rendez-vous outputs, and a computation block
  whose memory C-elements double as the 2x1 decision-wait.

Input patterns that decode as forbidden (multi-hot one-of-n) never fire a
LUT: transparent-style gates hold their previous output, memory-style gates
emit the inactive level so the C-elements freeze.  The block refuses to act
on corrupt data instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from .encodings import Protocol
from .plb import (
    NC,
    LutTable,
    PlbConfig,
    WireRef,
    validate_config,
)

GateFn = Callable[..., int]


class MappingError(ValueError):
    """Gate shape or wire budget that the block cannot accommodate."""


def _wire(sig: str, idx: int, width: int) -> WireRef:
    return WireRef(sig, idx, width)


def _build_lut(fn: Callable[[Tuple[int, ...]], int]) -> LutTable:
    bits = 0
    for idx in range(64):
        pins = tuple((idx >> i) & 1 for i in range(6))
        if fn(pins):
            bits |= 1 << idx
    return LutTable(bits)


def _no_feedback() -> Tuple[Tuple[bool, ...], ...]:
    return tuple((False,) * 6 for _ in range(4))


def _feedback(pins_per_lut: Sequence[Sequence[int]]) -> Tuple[Tuple[bool, ...], ...]:
    return tuple(
        tuple(i in pins for i in range(6)) for pins in pins_per_lut
    )


@dataclass(frozen=True)
class PlbUnit:
    """One placed block of a mapped gate."""

    role: str  # "main" or "decision_wait"
    config: PlbConfig
    output_map: Tuple[Optional[WireRef], ...]  # signal wire driven by O0..O3
    sout_map: Tuple[Optional[str], Optional[str]]  # wires driven by the ack XORs


@dataclass(frozen=True)
class MappedGate:
    name: str
    protocol: Protocol
    plbs: Tuple[PlbUnit, ...]
    # Wires that exist only between the blocks of this gate.
    internal_signals: Tuple[Tuple[str, int], ...] = ()


def _one_hot_value(bits: Tuple[int, ...]) -> Tuple[bool, bool, Optional[int]]:
    """(is_null, is_forbidden, value) for a one-of-n slice."""
    w = sum(bits)
    if w == 0:
        return True, False, None
    if w == 1:
        return False, False, bits.index(1)
    return False, True, None


# -- four-phase, one-of-2, two inputs ---------------------------------------

def map_4ph_2in(
    f: GateFn,
    with_ack: bool = True,
    inputs: Tuple[str, str] = ("x", "y"),
    out: str = "o",
    ack: str = "ack",
) -> PlbUnit:
    """Two-input dual-rail gate on L0/L1 with transparent memory points.

    L0 computes the 0-wire and L1 the 1-wire.  The memory effect lives in
    the LUTs' own-output feedback (pin 0 for L0, pin 1 for L1); the
    acknowledge wire is duplicated on the two pins each LUT gives up to its
    feedback, which keeps the data wires' loads equal.
    """
    xn, yn = inputs

    def lut(for_wire: int) -> LutTable:
        def fn(p: Tuple[int, ...]) -> int:
            hold = p[0] if for_wire == 0 else p[1]
            a = (p[1] if for_wire == 0 else p[0]) if with_ack else None
            x_null, x_forb, xv = _one_hot_value((p[2], p[3]))
            y_null, y_forb, yv = _one_hot_value((p[4], p[5]))
            if x_forb or y_forb:
                return hold
            if xv is not None and yv is not None and (a is None or a == 0):
                return 1 if f(xv, yv) == for_wire else 0
            if x_null and y_null and (a is None or a == 1):
                return 0
            return hold

        return _build_lut(fn)

    ack_ref = _wire(ack, 0, 1) if with_ack else NC
    assignment = (
        ack_ref, ack_ref,
        _wire(xn, 0, 2), _wire(xn, 1, 2), _wire(yn, 0, 2), _wire(yn, 1, 2),
    ) + (NC,) * 6

    config = PlbConfig(
        luts=(lut(0), lut(1), LutTable.zero(), LutTable.zero()),
        feedback_sel=_feedback([(0,), (1,), (), ()]),
        mem_bypass=(True, True),
        input_assignment=assignment,
    )
    return PlbUnit(
        role="main",
        config=config,
        output_map=(_wire(out, 0, 2), _wire(out, 1, 2), None, None),
        sout_map=(f"{out}.sout", None),
    )


# -- four-phase, one-of-2, three inputs --------------------------------------

def map_4ph_3in(
    f: GateFn,
    g: Optional[GateFn] = None,
    inputs: Tuple[str, str, str] = ("x", "y", "z"),
    out: str = "o",
    out2: str = "o2",
    with_ack: bool = False,
) -> PlbUnit:
    """Three-input dual-rail gate using the memory points and the 6-input OR.

    The three inputs consume the whole 6-wire budget, so there is no room
    for an acknowledge input; requesting one is an error.  The LUTs compute
    the input rendez-vous fused with the function, the OR detects the return
    to NULL, and the memory C-elements hold in between.  A second function
    ``g`` over the same inputs may occupy the other LUT pair (the classic
    sum/carry pairing).
    """
    if with_ack:
        raise MappingError(
            "three dual-rail inputs occupy all 6 wires; no room for an acknowledge"
        )
    xn, yn, zn = inputs

    def lut(func: GateFn, for_wire: int) -> LutTable:
        def fn(p: Tuple[int, ...]) -> int:
            x_null, x_forb, xv = _one_hot_value((p[0], p[1]))
            y_null, y_forb, yv = _one_hot_value((p[2], p[3]))
            z_null, z_forb, zv = _one_hot_value((p[4], p[5]))
            if x_forb or y_forb or z_forb:
                return 0
            if xv is not None and yv is not None and zv is not None:
                return 1 if func(xv, yv, zv) == for_wire else 0
            return 0

        return _build_lut(fn)

    data = (
        _wire(xn, 0, 2), _wire(xn, 1, 2),
        _wire(yn, 0, 2), _wire(yn, 1, 2),
        _wire(zn, 0, 2), _wire(zn, 1, 2),
    )
    if g is None:
        luts = (lut(f, 0), lut(f, 1), LutTable.zero(), LutTable.zero())
        assignment = data + (NC,) * 6
        mem_bypass = (False, True)
        output_map = (_wire(out, 0, 2), _wire(out, 1, 2), None, None)
        sout_map = (f"{out}.sout", None)
    else:
        luts = (lut(f, 0), lut(f, 1), lut(g, 0), lut(g, 1))
        assignment = data + data
        mem_bypass = (False, False)
        output_map = (
            _wire(out, 0, 2), _wire(out, 1, 2),
            _wire(out2, 0, 2), _wire(out2, 1, 2),
        )
        sout_map = (f"{out}.sout", f"{out2}.sout")

    config = PlbConfig(
        luts=luts,
        feedback_sel=_no_feedback(),
        mem_bypass=mem_bypass,
        input_assignment=assignment,
    )
    return PlbUnit("main", config, output_map, sout_map)


# -- four-phase, one-of-3, two inputs ----------------------------------------

def map_4ph_ter_2in(
    f: GateFn,
    inputs: Tuple[str, str] = ("x", "y"),
    out: str = "o",
    with_ack: bool = False,
) -> PlbUnit:
    """Two-input ternary gate: three LUTs drive one wire each, L3 stays 0.

    Both input groups carry the same six wires so every wire is loaded
    twice, and the two 6-input ORs therefore agree.  The grouping selector
    collects all four memory outputs under a single acknowledge XOR.
    """
    if with_ack:
        raise MappingError(
            "two one-of-3 inputs occupy all 6 wires; no room for an acknowledge"
        )
    xn, yn = inputs

    def lut(for_wire: int) -> LutTable:
        def fn(p: Tuple[int, ...]) -> int:
            x_null, x_forb, xv = _one_hot_value((p[0], p[1], p[2]))
            y_null, y_forb, yv = _one_hot_value((p[3], p[4], p[5]))
            if x_forb or y_forb:
                return 0
            if xv is not None and yv is not None:
                return 1 if f(xv, yv) == for_wire else 0
            return 0

        return _build_lut(fn)

    data = tuple(_wire(xn, i, 3) for i in range(3)) + tuple(
        _wire(yn, i, 3) for i in range(3)
    )
    config = PlbConfig(
        luts=(lut(0), lut(1), lut(2), LutTable.zero()),
        feedback_sel=_no_feedback(),
        mem_bypass=(False, False),
        combine_sel=True,
        input_assignment=data + data,
    )
    return PlbUnit(
        role="main",
        config=config,
        output_map=(
            _wire(out, 0, 3), _wire(out, 1, 3), _wire(out, 2, 3), None,
        ),
        sout_map=(f"{out}.sout", None),
    )


# -- LEDR, two inputs ---------------------------------------------------------

def map_ledr_2in(
    f: GateFn,
    inputs: Tuple[str, str] = ("x", "y"),
    out: str = "o",
    ack: str = "ack",
) -> PlbUnit:
    """Two-input LEDR gate; same wiring plan as the dual-rail two-input gate.

    The output pair transitions when both input phases agree and oppose the
    acknowledge: to (f, f) when the common phase is even, to (f, not f) when
    odd, so the output phase always ends up matching the inputs'.
    """
    xn, yn = inputs

    def lut(for_wire: int) -> LutTable:
        def fn(p: Tuple[int, ...]) -> int:
            hold = p[0] if for_wire == 0 else p[1]
            a = p[1] if for_wire == 0 else p[0]
            xd, xr, yd, yr = p[2], p[3], p[4], p[5]
            px, py = xd ^ xr, yd ^ yr
            if px == 0 and py == 0 and a == 1:
                v = f(xd, yd)
                return v
            if px == 1 and py == 1 and a == 0:
                v = f(xd, yd)
                return v if for_wire == 0 else v ^ 1
            return hold

        return _build_lut(fn)

    ack_ref = _wire(ack, 0, 1)
    assignment = (
        ack_ref, ack_ref,
        _wire(xn, 0, 2), _wire(xn, 1, 2), _wire(yn, 0, 2), _wire(yn, 1, 2),
    ) + (NC,) * 6
    config = PlbConfig(
        luts=(lut(0), lut(1), LutTable.zero(), LutTable.zero()),
        feedback_sel=_feedback([(0,), (1,), (), ()]),
        mem_bypass=(True, True),
        input_assignment=assignment,
    )
    return PlbUnit(
        role="main",
        config=config,
        output_map=(_wire(out, 0, 2), _wire(out, 1, 2), None, None),
        sout_map=(f"{out}.sout", None),
    )


# -- LEDR, three inputs -------------------------------------------------------

def map_ledr_3in(
    f: GateFn,
    inputs: Tuple[str, str, str] = ("x", "y", "z"),
    out: str = "o",
    ack: str = "ack",
) -> PlbUnit:
    """Three-input LEDR gate split across both LUT pairs.

    With three LEDR inputs plus the acknowledge the transition condition
    reads seven wires, one more than a LUT sees, so the data wire of the
    output is built as rendez-vous(L0, L2) and the repeat wire as
    rendez-vous(L1, L3).  Outside their transition conditions L0/L1 sit at 0
    and L2/L3 at 1, which parks the C-elements.

    Pin split: L0/L1 (which gate the rises) see the acknowledge, both data
    wires of the second and third inputs, and the first input's data wire;
    they fire only when the second and third phases agree against the
    acknowledge, so they are quiet at reset and blind only to the first
    input's phase.  L2/L3 (which gate the falls) see all six data wires and
    require the three phases to agree.  The conjunction the C-elements
    enforce is the full firing rule whenever the first input has settled,
    which the environment's emission order guarantees under matched delays;
    the first input's phase is the one unavoidable blind spot of a 7-wire
    condition split over 6-wire tables.  Its repeat wire also carries a
    single load where every other wire carries two, which the legality
    check reports on purpose.
    """
    xn, yn, zn = inputs

    # Pins 1..5 on both sides: xd, yd, yr, zd, zr.  Pin 0 differs: the
    # acknowledge on the low side, the first repeat wire on the high side.
    def lut_lo(repeat_wire: bool) -> LutTable:
        def fn(p: Tuple[int, ...]) -> int:
            a, xd, yd, yr, zd, zr = p
            py, pz = yd ^ yr, zd ^ zr
            if py == pz and a != py:
                return f(xd, yd, zd) ^ (py if repeat_wire else 0)
            return 0

        return _build_lut(fn)

    def lut_hi(repeat_wire: bool) -> LutTable:
        def fn(p: Tuple[int, ...]) -> int:
            xr, xd, yd, yr, zd, zr = p
            px, py, pz = xd ^ xr, yd ^ yr, zd ^ zr
            if px == py == pz:
                return f(xd, yd, zd) ^ (px if repeat_wire else 0)
            return 1

        return _build_lut(fn)

    ack_ref = _wire(ack, 0, 1)
    lo = (
        ack_ref,
        _wire(xn, 0, 2),
        _wire(yn, 0, 2), _wire(yn, 1, 2),
        _wire(zn, 0, 2), _wire(zn, 1, 2),
    )
    hi = (
        _wire(xn, 1, 2),
        _wire(xn, 0, 2),
        _wire(yn, 0, 2), _wire(yn, 1, 2),
        _wire(zn, 0, 2), _wire(zn, 1, 2),
    )
    config = PlbConfig(
        luts=(lut_lo(False), lut_lo(True), lut_hi(False), lut_hi(True)),
        feedback_sel=_no_feedback(),
        mem_bypass=(False, False),
        or6_bypass_sel=(True, False),
        input_assignment=lo + hi,
    )
    return PlbUnit(
        role="main",
        config=config,
        output_map=(_wire(out, 0, 2), _wire(out, 1, 2), None, None),
        sout_map=(f"{out}.sout", None),
    )


# -- edge protocol, two inputs ------------------------------------------------

# Decision-wait cell index: C(i,j) sits at 2*i + j.
_DW_CELLS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _dw_lut(cell: int) -> LutTable:
    """C(i,j) = rendez-vous(A_i xor C(i,1-j), B_j xor C(1-i,j)).

    Pin layout per cell follows the block's feedback reach: each cell reads
    itself and its two neighbours on the feedback pins, its B wire on the
    remaining low pin, and A0/A1 on pins 4/5.  The unused A wire is part of
    the pin assignment (equal loading) but ignored by the table.
    """
    i, j = _DW_CELLS[cell]

    def fn(p: Tuple[int, ...]) -> int:
        if cell == 0:  # pins: C00 C01 C10 B0 A0 A1
            self_, row_n, col_n, b, a = p[0], p[1], p[2], p[3], p[4]
        elif cell == 1:  # pins: C00 C01 B1 C11 A0 A1
            self_, row_n, col_n, b, a = p[1], p[0], p[3], p[2], p[4]
        elif cell == 2:  # pins: C00 B0 C10 C11 A0 A1
            self_, row_n, col_n, b, a = p[2], p[3], p[0], p[1], p[5]
        else:  # pins: B1 C01 C10 C11 A0 A1
            self_, row_n, col_n, b, a = p[3], p[2], p[1], p[0], p[5]
        u = a ^ row_n
        v = b ^ col_n
        return (u & v) | (self_ & (u | v))

    return _build_lut(fn)


def map_edge_2in(
    f: GateFn,
    inputs: Tuple[str, str] = ("a", "b"),
    out: str = "o",
    ack: str = "ack",
    prefix: Optional[str] = None,
) -> MappedGate:
    """Two-input edge-signalling gate; always two blocks.

    The first block is the 2x2 decision-wait: its four LUTs hold the C(i,j)
    rendez-vous cells through cross feedback, memory points transparent.
    The second block computes the output toggles as XORs of the C cells
    (wire 1 collects the cells where f is 1, wire 0 the others) and reuses
    its memory C-elements as the 2x1 decision-wait that withholds the
    output until the acknowledge has toggled.
    """
    an, bn = inputs
    pre = prefix or out
    cn = f"{pre}.c"

    dw_assignment = (
        NC, NC, _wire(bn, 1, 2), _wire(bn, 0, 2), _wire(an, 0, 2), _wire(an, 1, 2),
        _wire(bn, 1, 2), _wire(bn, 0, 2), NC, NC, _wire(an, 0, 2), _wire(an, 1, 2),
    )
    dw_config = PlbConfig(
        luts=tuple(_dw_lut(c) for c in range(4)),
        feedback_sel=_feedback([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]),
        mem_bypass=(True, True),
        input_assignment=dw_assignment,
    )
    dw = PlbUnit(
        role="decision_wait",
        config=dw_config,
        output_map=tuple(_wire(cn, c, 4) for c in range(4)),
        sout_map=(None, None),
    )

    ones = [c for c, (i, j) in enumerate(_DW_CELLS) if f(i, j) == 1]
    zeros = [c for c, (i, j) in enumerate(_DW_CELLS) if f(i, j) == 0]

    def parity_lut(cells: Sequence[int]) -> LutTable:
        def fn(p: Tuple[int, ...]) -> int:
            acc = 0
            for c in cells:
                acc ^= p[c]
            return acc

        return _build_lut(fn)

    def dw21_lut(loop_pin: int) -> LutTable:
        # not(output xor acknowledge); re-arms the C-elements after the ack.
        def fn(p: Tuple[int, ...]) -> int:
            return 1 ^ p[loop_pin] ^ p[4]

        return _build_lut(fn)

    comp_assignment = (
        _wire(cn, 0, 4), _wire(cn, 1, 4), _wire(cn, 2, 4), _wire(cn, 3, 4), NC, NC,
        _wire(out, 0, 2), _wire(out, 1, 2), NC, NC, _wire(ack, 0, 1), NC,
    )
    comp_config = PlbConfig(
        luts=(parity_lut(ones), parity_lut(zeros), dw21_lut(0), dw21_lut(1)),
        feedback_sel=_no_feedback(),
        mem_bypass=(False, False),
        or6_bypass_sel=(True, False),
        input_assignment=comp_assignment,
    )
    # O0 = C(L0, L2) carries the 1-wire, O1 = C(L1, L3) the 0-wire.
    comp = PlbUnit(
        role="main",
        config=comp_config,
        output_map=(_wire(out, 1, 2), _wire(out, 0, 2), None, None),
        sout_map=(f"{out}.sout", None),
    )
    return MappedGate(
        name=out,
        protocol=Protocol.EDGE,
        plbs=(dw, comp),
        internal_signals=((cn, 4),),
    )


def emit_truth_tables(f: GateFn, protocol: Protocol) -> Tuple[LutTable, ...]:
    """The four tables a two-input gate compiles to under ``protocol``."""
    if protocol is Protocol.FOUR_PHASE:
        return map_4ph_2in(f).config.luts
    if protocol is Protocol.LEDR:
        return map_ledr_2in(f).config.luts
    return map_edge_2in(f).plbs[1].config.luts


def check_mapped(unit: PlbUnit) -> None:
    diags = validate_config(unit.config)
    if diags:
        raise MappingError("; ".join(diags))
