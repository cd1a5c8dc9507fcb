import itertools
import random

import pytest

from qdifab.progchain import (
    Block,
    ProgrammingError,
    drain_block,
    load_block,
    reconfigure_block,
)


def test_load_fills_all_stages_and_reads_back():
    block = Block(8)
    bits = [1, 0, 1, 1, 0, 0, 1, 0]
    load_block(block, bits)
    assert block.configured
    assert all(s is not None for s in block.stages)
    assert block.stored_bits() == tuple(bits)
    assert drain_block(block) == tuple(bits)


def test_zero_bits_leaves_unconfigured():
    block = Block(4)
    load_block(block, [])
    assert not block.configured
    assert block.stored_bits() == ()


def test_overflow_rejected():
    with pytest.raises(ProgrammingError):
        load_block(Block(8), [1] * 9)


def test_load_requires_drained_chain():
    block = load_block(Block(4), [1, 0])
    with pytest.raises(ProgrammingError):
        load_block(block, [1])


def test_fifo_order_exhaustive_short_sequences():
    for n in range(0, 9):
        for bits in itertools.product((0, 1), repeat=n):
            block = Block(8)
            load_block(block, list(bits))
            assert block.stored_bits() == bits
            assert drain_block(block) == bits


def test_fifo_order_randomized_long_sequences():
    rng = random.Random(20080131)
    for _ in range(1000):
        length = rng.randint(9, 64)
        block = Block(length)
        bits = [rng.randint(0, 1) for _ in range(rng.randint(0, length))]
        load_block(block, bits)
        assert drain_block(block) == tuple(bits)


def test_dual_rail_view_is_one_hot():
    block = load_block(Block(4), [1, 0, 1])
    for rails, bit in zip(block.rails(), block.stages):
        if bit is None:
            assert rails == (0, 0)
        else:
            assert rails == ((0, 1) if bit else (1, 0))


def test_reconfigure_inverted_bits():
    bits = [1, 0, 1, 1, 0]
    block = load_block(Block(8), bits)
    log = reconfigure_block(block, [b ^ 1 for b in bits])
    assert log.drained == tuple(bits)
    assert block.stored_bits() == tuple(b ^ 1 for b in bits)
    assert log.outputs_zero_every_tick


def test_reconfigure_same_bits_idempotent():
    bits = [0, 1, 1, 0]
    block = load_block(Block(6), bits)
    before = block.snapshot()
    reconfigure_block(block, bits)
    assert block.snapshot() == before
    assert block.configured


def test_drain_without_reload_leaves_block_dark():
    block = load_block(Block(4), [1, 1, 0])
    log = reconfigure_block(block, [])
    assert log.drained == (1, 1, 0)
    assert not block.configured
    assert block.outputs_forced_zero()


def test_reconfigure_requires_configured_block():
    with pytest.raises(ProgrammingError):
        reconfigure_block(Block(4), [1])


def test_outputs_zero_during_whole_operation():
    block = load_block(Block(8), [1] * 8)
    log = reconfigure_block(block, [0] * 8)
    assert log.ticks > 0
    assert log.outputs_zero_every_tick


def test_partial_reconfiguration_isolation():
    a = load_block(Block(8), [1, 0, 1, 0, 1, 0, 1, 0])
    b = load_block(Block(8), [0, 0, 1, 1, 0, 0, 1, 1])
    before_b = b.snapshot()
    reconfigure_block(a, [1] * 8)
    assert b.snapshot() == before_b
    assert b.stored_bits() == (0, 0, 1, 1, 0, 0, 1, 1)
    before_a = a.snapshot()
    reconfigure_block(b, [1, 1, 1, 0, 0, 0, 1, 1])
    assert a.snapshot() == before_a
