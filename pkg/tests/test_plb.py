import itertools

import pytest

from qdifab.encodings import encode_4ph, encode_4ph_null
from qdifab.mapper import map_4ph_2in, map_ledr_2in
from qdifab.plb import (
    LutTable,
    OscillationError,
    PlbConfig,
    WireRef,
    ack_outputs,
    lut_eval,
    plb_reset,
    plb_step,
    validate_config,
)

AND2 = lambda x, y: x & y
XOR2 = lambda x, y: x ^ y


def step_unit(unit, state, **signals):
    """Evaluate a mapped block against named signal wire values."""
    values = []
    for ref in unit.config.input_assignment:
        if ref is None:
            values.append(0)
        else:
            values.append(signals[ref.signal][ref.index])
    return plb_step(unit.config, state, values)


def test_lut_eval_all_zero_table():
    t = LutTable.zero()
    for combo in itertools.product((0, 1), repeat=6):
        assert lut_eval(t, combo) == 0


def test_lut_eval_identity_on_i0():
    t = LutTable.from_function(lambda *p: p[0])
    assert lut_eval(t, (1, 0, 0, 0, 0, 0)) == 1
    assert lut_eval(t, (0, 1, 1, 1, 1, 1)) == 0


def test_lut_eval_and_of_i4_i5():
    # Expected table built by independent enumeration.
    expected = 0
    for idx in range(64):
        if (idx >> 4) & 1 and (idx >> 5) & 1:
            expected |= 1 << idx
    t = LutTable.from_function(lambda *p: p[4] & p[5])
    assert t.bits == expected
    assert lut_eval(t, (0, 0, 0, 0, 1, 1)) == 1
    assert lut_eval(t, (1, 1, 1, 1, 1, 0)) == 0


def test_plb_reset_quiescent_and_step_identity():
    unit = map_4ph_2in(AND2)
    st = plb_reset(unit.config)
    assert st.mem_out == (0, 0, 0, 0)
    again = plb_step(unit.config, st, (0,) * 12)
    assert again == st


def test_plb_4ph_and_fires_and_acks():
    unit = map_4ph_2in(AND2)
    st = plb_reset(unit.config)
    st = step_unit(
        unit, st,
        **{"x": encode_4ph(1, 2), "y": encode_4ph(1, 2), "ack": (0,)},
    )
    assert st.mem_out[:2] == (0, 1)
    assert ack_outputs(unit.config, st)[0] == 1
    # Inputs back to NULL with the acknowledge high: output clears.
    st = step_unit(
        unit, st,
        **{"x": encode_4ph_null(2), "y": encode_4ph_null(2), "ack": (1,)},
    )
    assert st.mem_out[:2] == (0, 0)
    assert ack_outputs(unit.config, st)[0] == 0


def test_plb_ledr_xor_phase_advance():
    unit = map_ledr_2in(XOR2)
    st = plb_reset(unit.config)
    # Both inputs at odd phase carrying (1, 1), acknowledge low, output even.
    st = step_unit(
        unit, st,
        **{"x": (1, 0), "y": (1, 0), "ack": (0,)},
    )
    od, orr = st.mem_out[0], st.mem_out[1]
    assert (od ^ orr) == 1  # output phase became odd
    assert od == 0  # xor(1, 1)


def test_plb_step_deterministic():
    unit = map_4ph_2in(XOR2)
    st = plb_reset(unit.config)
    ins = (0, 0, 1, 0, 0, 1) + (0,) * 6
    a = plb_step(unit.config, st, ins)
    b = plb_step(unit.config, st, ins)
    assert a == b


def test_plb_oscillation_diagnostic():
    # A LUT inverting its own feedback cannot settle.
    ring = PlbConfig(
        luts=(LutTable.from_function(lambda *p: 1 ^ p[0]),) + (LutTable.zero(),) * 3,
        feedback_sel=((True,) + (False,) * 5, (False,) * 6, (False,) * 6, (False,) * 6),
        mem_bypass=(True, True),
    )
    with pytest.raises(OscillationError):
        plb_reset(ring)
    assert any("oscillates" in d for d in validate_config(ring))


def test_validate_config_accepts_mapped():
    assert validate_config(map_4ph_2in(AND2).config) == []
    assert validate_config(map_ledr_2in(XOR2).config) == []


def test_validate_config_load_balance():
    # x.0 on three pins, x.1 on two: distinguishable loads.
    refs = [WireRef("x", 0, 2)] * 3 + [WireRef("x", 1, 2)] * 2 + [None] * 7
    cfg = PlbConfig(luts=(LutTable.zero(),) * 4, input_assignment=tuple(refs))
    diags = validate_config(cfg)
    assert any("unbalanced" in d and "x" in d for d in diags)


def test_validate_config_illegal_feedback_pin():
    sel = [[False] * 6 for _ in range(4)]
    sel[2][5] = True
    cfg = PlbConfig(
        luts=(LutTable.zero(),) * 4,
        feedback_sel=tuple(tuple(s) for s in sel),
    )
    diags = validate_config(cfg)
    assert any("illegal feedback" in d and "5" in d for d in diags)


def test_validate_config_cross_mode_requires_memory():
    cfg = PlbConfig(
        luts=(LutTable.zero(),) * 4,
        mem_bypass=(True, True),
        or6_bypass_sel=(True, False),
    )
    diags = validate_config(cfg)
    assert any("requires its memory point active" in d for d in diags)


def _reachable_env_states(f, with_ack=True):
    """Breadth-first exploration of the block under a well-formed
    four-phase environment; yields every reached block state."""
    unit = map_4ph_2in(f, with_ack=with_ack)
    null = encode_4ph_null(2)
    init = (null, null, 0, plb_reset(unit.config))
    seen = {repr(init)}
    frontier = [init]
    while frontier:
        x, y, ack, st = frontier.pop()
        yield st
        sout = ack_outputs(unit.config, st)[0]
        moves = []
        if x == null and sout == 0:
            moves += [("x", encode_4ph(v, 2)) for v in (0, 1)]
        if x != null and sout == 1:
            moves.append(("x", null))
        if y == null and sout == 0:
            moves += [("y", encode_4ph(v, 2)) for v in (0, 1)]
        if y != null and sout == 1:
            moves.append(("y", null))
        if ack == 0 and sout == 1:
            moves.append(("ack", 1))
        if ack == 1 and sout == 0:
            moves.append(("ack", 0))
        for kind, val in moves:
            nx, ny, nack = x, y, ack
            if kind == "x":
                nx = val
            elif kind == "y":
                ny = val
            else:
                nack = val
            nst = plb_step(
                unit.config, st,
                (nack, nack, nx[0], nx[1], ny[0], ny[1]) + (0,) * 6,
            )
            key = repr((nx, ny, nack, nst))
            if key not in seen:
                seen.add(key)
                frontier.append((nx, ny, nack, nst))


@pytest.mark.parametrize("fn_bits", range(16))
def test_4ph_output_pair_never_forbidden(fn_bits):
    f = lambda x, y: (fn_bits >> (x + 2 * y)) & 1
    for st in _reachable_env_states(f):
        assert st.mem_out[:2] != (1, 1)
