"""Structural model of one programmable logic block.

The block holds four 6-input LUTs (L0..L3).  L0 and L1 read the first group
of six network inputs, L2 and L3 the second group.  Input pins 0..3 of every
LUT can be switched, one programming point each, from the network wire to the
output of the same-numbered LUT, which provides the internal feedback paths.
Pins 4 and 5 are network-only.

Behind the LUTs sit two memory points (a pair of C-elements plus an ack XOR
each).  The companion input of each C-element is normally the 6-input OR of
the group's network pins (the return-to-NULL detector).  A programming point
per memory point replaces that companion with the opposite pair's LUT
outputs, turning O0 into rendez-vous(L0, L2) and O1 into rendez-vous(L1, L3);
the opposite memory point is parked at 0 while its LUTs are borrowed.  A
final selector groups the four memory outputs under a single acknowledge XOR
instead of one XOR per pair.

Everything is evaluated with zero internal delay inside one step.  Internal
feedback is settled by iterating the LUT stage to a fixpoint; a step that
fails to settle within ITERATION_BOUND rounds reports an oscillation
diagnostic instead of silently picking a state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .primitives import CElementState, c_element_step, ack_xor, or6

ITERATION_BOUND = 16

LUT_INPUTS = 6
LUT_SIZE = 1 << LUT_INPUTS
FEEDBACK_PINS = (0, 1, 2, 3)


@dataclass(frozen=True)
class LutTable:
    """64-entry truth table; input pin i contributes 2**i to the index."""

    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << LUT_SIZE):
            raise ValueError("LUT table wider than 64 bits")

    def eval(self, inputs: Sequence[int]) -> int:
        idx = 0
        for i, b in enumerate(inputs):
            idx |= (b & 1) << i
        return (self.bits >> idx) & 1

    @classmethod
    def from_function(cls, fn: Callable[..., int]) -> "LutTable":
        bits = 0
        for idx in range(LUT_SIZE):
            pins = tuple((idx >> i) & 1 for i in range(LUT_INPUTS))
            if fn(*pins):
                bits |= 1 << idx
        return cls(bits)

    @classmethod
    def zero(cls) -> "LutTable":
        return cls(0)


@dataclass(frozen=True)
class WireRef:
    """Network pin binding: which wire of which signal drives the pin."""

    signal: str
    index: int
    width: int = 1

    def __str__(self):
        # Single-wire signals (acknowledges) go by their bare name.
        if self.width == 1:
            return self.signal
        return f"{self.signal}.{self.index}"


# An unconnected pin reads constant 0 but still presents its input load.
NC = None

InputAssignment = Tuple[Optional[WireRef], ...]  # 12 pins: group' 0..5, group'' 0..5


@dataclass(frozen=True)
class PlbConfig:
    luts: Tuple[LutTable, LutTable, LutTable, LutTable]
    feedback_sel: Tuple[Tuple[bool, ...], ...] = tuple((False,) * 6 for _ in range(4))
    mem_bypass: Tuple[bool, bool] = (False, False)
    or6_bypass_sel: Tuple[bool, bool] = (False, False)
    combine_sel: bool = False
    input_assignment: InputAssignment = (NC,) * 12


@dataclass(frozen=True)
class PlbState:
    """Settled values of the block: LUT outputs and memory C-element outputs."""

    lut_out: Tuple[int, int, int, int] = (0, 0, 0, 0)
    mem_out: Tuple[int, int, int, int] = (0, 0, 0, 0)  # O0..O3

    @property
    def outputs(self) -> Tuple[int, int, int, int]:
        return self.mem_out


class OscillationError(RuntimeError):
    """Internal feedback failed to settle within the iteration bound."""


def _lut_pin_values(
    config: PlbConfig, lut_out: Sequence[int], network: Sequence[int], k: int
) -> Tuple[int, ...]:
    base = 0 if k < 2 else 6
    sel = config.feedback_sel[k]
    return tuple(
        lut_out[i] if (i in FEEDBACK_PINS and sel[i]) else network[base + i]
        for i in range(LUT_INPUTS)
    )


def _settle_luts(
    config: PlbConfig, start: Sequence[int], network: Sequence[int]
) -> Tuple[int, ...]:
    cur = tuple(start)
    for _ in range(ITERATION_BOUND):
        nxt = tuple(
            config.luts[k].eval(_lut_pin_values(config, cur, network, k))
            for k in range(4)
        )
        if nxt == cur:
            return cur
        cur = nxt
    raise OscillationError("LUT feedback loop did not settle")


def plb_step(
    config: PlbConfig, state: PlbState, network_inputs: Sequence[int]
) -> PlbState:
    """Settle the block against the given 12 network input levels.

    Raises :class:`OscillationError` when the internal feedback oscillates;
    the caller is expected to turn that into a simulation diagnostic.
    """
    network = tuple(int(b) for b in network_inputs)
    if len(network) != 12:
        raise ValueError(f"expected 12 network inputs, got {len(network)}")

    lut_out = _settle_luts(config, state.lut_out, network)
    or6_lo = or6(network[0:6])
    or6_hi = or6(network[6:12])

    cross_a, cross_b = config.or6_bypass_sel
    mem = list(state.mem_out)

    def c_step(prev: int, a: int, b: int) -> int:
        return c_element_step(CElementState(prev, 2), (a, b))

    # Memory point A guards (L0, L1), B guards (L2, L3).
    if cross_a:
        # A's companions are the opposite pair's LUTs; B is parked.
        if config.mem_bypass[0]:
            mem[0], mem[1] = lut_out[0], lut_out[1]
        else:
            mem[0] = c_step(mem[0], lut_out[0], lut_out[2])
            mem[1] = c_step(mem[1], lut_out[1], lut_out[3])
        mem[2] = mem[3] = 0
    elif cross_b:
        if config.mem_bypass[1]:
            mem[2], mem[3] = lut_out[2], lut_out[3]
        else:
            mem[2] = c_step(mem[2], lut_out[2], lut_out[0])
            mem[3] = c_step(mem[3], lut_out[3], lut_out[1])
        mem[0] = mem[1] = 0
    else:
        if config.mem_bypass[0]:
            mem[0], mem[1] = lut_out[0], lut_out[1]
        else:
            mem[0] = c_step(mem[0], lut_out[0], or6_lo)
            mem[1] = c_step(mem[1], lut_out[1], or6_lo)
        if config.mem_bypass[1]:
            mem[2], mem[3] = lut_out[2], lut_out[3]
        else:
            mem[2] = c_step(mem[2], lut_out[2], or6_hi)
            mem[3] = c_step(mem[3], lut_out[3], or6_hi)

    return PlbState(lut_out=lut_out, mem_out=tuple(mem))


def plb_reset(config: PlbConfig) -> PlbState:
    """State after the global reset: every wire 0, combinational nets settled.

    The reset wire forces all stateful nodes to 0; combinational LUT outputs
    then take whatever their tables say for all-zero inputs (some tables are
    1 there by design, e.g. locked rendez-vous companions).  The block's
    outputs must still read 0.
    """
    settled = plb_step(config, PlbState(), (0,) * 12)
    return settled


def ack_outputs(config: PlbConfig, state: PlbState) -> Tuple[int, int]:
    """Acknowledge-out values (pair A, pair B).

    With the grouping selector set, pair A carries the XOR of all four
    memory outputs and pair B is unused (held 0).
    """
    o = state.mem_out
    if config.combine_sel:
        return ack_xor(o), 0
    return ack_xor(o[0:2]), ack_xor(o[2:4])


def lut_eval(table: LutTable, inputs: Sequence[int]) -> int:
    return table.eval(inputs)


def validate_config(config: PlbConfig) -> List[str]:
    """Legality diagnostics for a block configuration; empty means legal.

    Checks the feedback programming points stay on pins 0..3, mode selectors
    are mutually consistent, the block is quiescent at reset, and every wire
    of a multi-wire signal presents the same number of network pin loads.
    """
    diags: List[str] = []

    for k, sel in enumerate(config.feedback_sel):
        if len(sel) != LUT_INPUTS:
            diags.append(f"L{k}: feedback selection vector must cover 6 pins")
            continue
        for i in (4, 5):
            if sel[i]:
                diags.append(f"L{k}: illegal feedback on input {i} (pins 4,5 are network-only)")

    cross_a, cross_b = config.or6_bypass_sel
    if cross_a and cross_b:
        diags.append("or6 bypass engaged on both memory points")
    if cross_a and config.mem_bypass[0]:
        diags.append("or6 bypass on pair A requires its memory point active")
    if cross_b and config.mem_bypass[1]:
        diags.append("or6 bypass on pair B requires its memory point active")

    # Load balance: within each multi-wire signal, every wire must drive the
    # same number of network pins, or the transitions become distinguishable.
    loads: dict[str, dict[int, int]] = {}
    widths: dict[str, int] = {}
    for ref in config.input_assignment:
        if ref is NC:
            continue
        loads.setdefault(ref.signal, {})
        loads[ref.signal][ref.index] = loads[ref.signal].get(ref.index, 0) + 1
        widths[ref.signal] = max(widths.get(ref.signal, ref.width), ref.width)
    for sig, per_wire in loads.items():
        if widths[sig] <= 1:
            continue
        counts = [per_wire.get(i, 0) for i in range(widths[sig])]
        if len(set(counts)) > 1:
            diags.append(
                f"signal {sig}: unbalanced pin loads {counts} across its wires"
            )

    try:
        st = plb_reset(config)
        if any(st.mem_out):
            diags.append("block emits nonzero outputs in the all-zero reset state")
    except OscillationError:
        diags.append("block oscillates in the all-zero reset state")

    return diags
