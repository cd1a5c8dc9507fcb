"""Asynchronous FIFO programming chain and partial reconfiguration.

Configuration bits travel through a chain of dual-rail buffer stages, each
a pair of C-elements holding at most one NULL-separated bit.  While the
tail acknowledge is held low the bits stack up in the chain; releasing it
drains them in arrival order.  A block is reprogrammed by draining its
chain and streaming a new bit sequence in, during which every logic-block
output attached to the block is forced to 0 and the block's switchboxes sit
in insulation mode until the new configuration has committed.

Blocks are fully independent: reconfiguring one cannot disturb another's
stage states, which the tests check bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple


class ProgrammingError(ValueError):
    pass


def _rails(bit: Optional[int]) -> Tuple[int, int]:
    if bit is None:
        return (0, 0)
    return (1, 0) if bit == 0 else (0, 1)


@dataclass
class Block:
    """One independently programmable region: a FIFO chain plus the names
    of the logic blocks its bits configure."""

    length: int
    targets: Tuple[str, ...] = ()
    stages: List[Optional[int]] = field(default_factory=list)
    tail_held: bool = True
    state: str = "unconfigured"  # unconfigured | programming | active

    def __post_init__(self):
        if not self.stages:
            self.stages = [None] * self.length

    # The chain storage, head to tail; each entry is a stage's dual-rail pair.
    def rails(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(_rails(b) for b in self.stages)

    def snapshot(self) -> Tuple[Optional[int], ...]:
        return tuple(self.stages)

    def stored_bits(self) -> Tuple[int, ...]:
        """Bits in arrival order (tail first), without disturbing the chain."""
        return tuple(b for b in reversed(self.stages) if b is not None)

    @property
    def configured(self) -> bool:
        return self.state == "active"

    def outputs_forced_zero(self) -> bool:
        return self.state != "active"


def _shift_tick(block: Block, feed: Optional[int]) -> Optional[int]:
    """One settle tick: bits move one stage tailward, a fed bit enters the
    head if it is free.  Returns the bit still waiting at the input."""
    for k in range(block.length - 1, 0, -1):
        if block.stages[k] is None and block.stages[k - 1] is not None:
            block.stages[k] = block.stages[k - 1]
            block.stages[k - 1] = None
    if feed is not None and block.stages[0] is None:
        block.stages[0] = feed
        return None
    return feed


def _settle(block: Block) -> None:
    while True:
        before = block.snapshot()
        _shift_tick(block, None)
        if block.snapshot() == before:
            return


def load_block(block: Block, bits: Sequence[int]) -> Block:
    """Stream NULL-separated bits into a reset chain with the tail held.

    Refuses more bits than stages; zero bits leave the block unconfigured.
    """
    if any(b is not None for b in block.stages):
        raise ProgrammingError("chain must be drained before loading")
    if not block.tail_held:
        raise ProgrammingError("tail acknowledge must be held during loading")
    if len(bits) > block.length:
        raise ProgrammingError(
            f"{len(bits)} bits overflow a {block.length}-stage chain"
        )
    if not bits:
        block.state = "unconfigured"
        return block
    block.state = "programming"
    pending = list(bits)
    waiting: Optional[int] = None
    guard = 0
    while pending or waiting is not None:
        if waiting is None:
            waiting = pending.pop(0)
        waiting = _shift_tick(block, waiting)
        guard += 1
        if guard > 4 * block.length * (len(bits) + 1):
            raise ProgrammingError("chain did not accept all bits")
    _settle(block)
    block.state = "active"
    return block


def drain_block(block: Block) -> Tuple[int, ...]:
    """Release the tail acknowledge and collect the bits in FIFO order."""
    block.tail_held = False
    block.state = "programming"
    out: List[int] = []
    while any(b is not None for b in block.stages):
        if block.stages[-1] is not None:
            out.append(block.stages[-1])
            block.stages[-1] = None
        _shift_tick(block, None)
    block.tail_held = True
    block.state = "unconfigured"
    return tuple(out)


@dataclass
class ReconfigLog:
    drained: Tuple[int, ...]
    ticks: int
    outputs_zero_every_tick: bool


def reconfigure_block(block: Block, new_bits: Sequence[int]) -> ReconfigLog:
    """Drain a configured block, stream the new bits, re-hold the tail.

    The block's logic outputs read 0 on every tick of the operation; the
    switchboxes stay insulated until the load commits.
    """
    if not block.configured:
        raise ProgrammingError("block is not configured")
    if len(new_bits) > block.length:
        raise ProgrammingError(
            f"{len(new_bits)} bits overflow a {block.length}-stage chain"
        )
    zero_log: List[bool] = []

    block.tail_held = False
    block.state = "programming"
    drained: List[int] = []
    while any(b is not None for b in block.stages):
        if block.stages[-1] is not None:
            drained.append(block.stages[-1])
            block.stages[-1] = None
        _shift_tick(block, None)
        zero_log.append(block.outputs_forced_zero())
    block.tail_held = True

    pending = list(new_bits)
    waiting: Optional[int] = None
    while pending or waiting is not None:
        if waiting is None:
            waiting = pending.pop(0)
        waiting = _shift_tick(block, waiting)
        zero_log.append(block.outputs_forced_zero())
    _settle(block)
    zero_log.append(block.outputs_forced_zero())

    block.state = "active" if new_bits else "unconfigured"
    return ReconfigLog(
        drained=tuple(drained),
        ticks=len(zero_log),
        outputs_zero_every_tick=all(zero_log),
    )
