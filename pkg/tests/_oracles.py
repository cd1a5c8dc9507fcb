"""Independent reference models for the handshake equations.

These deliberately avoid the table/block evaluation path: they are direct
transcriptions of the output-wire case equations, used as oracles.
"""

from __future__ import annotations

from typing import Optional


def all_16_functions():
    """Every two-input Boolean function, keyed by truth-table bits."""
    return {bits: (lambda x, y, b=bits: (b >> (x + 2 * y)) & 1) for bits in range(16)}


class FourPhase2InOracle:
    """Case equation for a dual-rail two-input gate with memory effect."""

    def __init__(self, f, with_ack: bool = True):
        self.f = f
        self.with_ack = with_ack
        self.o = (0, 0)

    def step(self, x: Optional[int], y: Optional[int], ack: int):
        valid = x is not None and y is not None
        null = x is None and y is None
        if valid and (not self.with_ack or ack == 0):
            v = self.f(x, y)
            self.o = (1 if v == 0 else 0, 1 if v == 1 else 0)
        elif null and (not self.with_ack or ack == 1):
            self.o = (0, 0)
        return self.o


class FourPhase3InOracle:
    def __init__(self, f):
        self.f = f
        self.o = (0, 0)

    def step(self, x, y, z):
        if x is not None and y is not None and z is not None:
            v = self.f(x, y, z)
            self.o = (1 if v == 0 else 0, 1 if v == 1 else 0)
        elif x is None and y is None and z is None:
            self.o = (0, 0)
        return self.o


class Ternary2InOracle:
    def __init__(self, f):
        self.f = f
        self.o = (0, 0, 0)

    def step(self, x, y):
        if x is not None and y is not None:
            v = self.f(x, y)
            self.o = tuple(1 if v == i else 0 for i in range(3))
        elif x is None and y is None:
            self.o = (0, 0, 0)
        return self.o


class Ledr2InOracle:
    """Case equation for the level-encoded dual-rail two-input gate."""

    def __init__(self, f):
        self.f = f
        self.od = 0
        self.orr = 0

    def step(self, xd, xr, yd, yr, ack):
        px, py = xd ^ xr, yd ^ yr
        if px == 0 and py == 0 and ack == 1:
            v = self.f(xd, yd)
            self.od, self.orr = v, v
        elif px == 1 and py == 1 and ack == 0:
            v = self.f(xd, yd)
            self.od, self.orr = v, v ^ 1
        return self.od, self.orr
