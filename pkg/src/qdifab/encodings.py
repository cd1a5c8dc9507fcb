"""Delay-insensitive signal encodings.

A logical signal travels over several physical wires so that every new value
changes exactly one wire.  Three codings are supported:

* four-phase one-of-n: value i puts a 1 on wire i, values are separated by
  the all-zero spacer (NULL), and the (1,1) pattern on a dual-rail pair is a
  forbidden state that indicates a malfunction or an attack;
* LEDR: two wires (data, repeat); the data wire level is the value, a
  repeated value toggles the repeat wire instead;
* edge: value i toggles wire i, instantaneous levels carry no meaning.

Wire index 0 is the least significant position of every bit vector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Tuple

Bits = Tuple[int, ...]

MAX_ARITY = 4


class Protocol(enum.Enum):
    FOUR_PHASE = "4ph"
    LEDR = "ledr"
    EDGE = "edge"


class CodeKind(enum.Enum):
    NULL = "null"
    VALID = "valid"
    FORBIDDEN = "forbidden"


class EncodingError(ValueError):
    """Raised when a value or signal shape is outside its legal domain."""


@dataclass(frozen=True)
class SignalSpec:
    """Shape of one logical signal: protocol, value count and wire count."""

    name: str
    protocol: Protocol
    arity: int

    def __post_init__(self):
        if not 2 <= self.arity <= MAX_ARITY:
            raise EncodingError(
                f"signal {self.name!r}: arity {self.arity} outside 2..{MAX_ARITY}"
            )
        if self.protocol is Protocol.LEDR and self.arity != 2:
            raise EncodingError(
                f"signal {self.name!r}: LEDR is restricted to binary signals"
            )

    @property
    def wire_count(self) -> int:
        # One wire per value for one-of-n and edge; LEDR is the (data, repeat) pair.
        return 2 if self.protocol is Protocol.LEDR else self.arity

    def wire_names(self) -> Tuple[str, ...]:
        return tuple(f"{self.name}.{i}" for i in range(self.wire_count))


@dataclass(frozen=True)
class ValueCode:
    """Decoded state of a one-of-n signal."""

    kind: CodeKind
    value: int | None
    wires: Bits

    def __repr__(self):
        if self.kind is CodeKind.VALID:
            return f"Valid({self.value})"
        return self.kind.name.capitalize()


def encode_4ph(value: int, arity: int) -> Bits:
    """One-hot vector for ``value``; wire ``value`` carries the 1."""
    if not 0 <= value < arity:
        raise EncodingError(f"value {value} out of range for arity {arity}")
    return tuple(1 if i == value else 0 for i in range(arity))


def encode_4ph_null(arity: int) -> Bits:
    """The all-zero spacer separating valid four-phase values."""
    return (0,) * arity


def decode_4ph(wires: Sequence[int]) -> ValueCode:
    """Classify a one-of-n wire pattern.

    All-zero is NULL, a single 1 at index i is Valid(i), anything else is
    Forbidden.  Forbidden is returned as a value rather than raised so a
    simulation can log the pattern and keep running.
    """
    bits = tuple(int(b) for b in wires)
    weight = sum(bits)
    if weight == 0:
        return ValueCode(CodeKind.NULL, None, bits)
    if weight == 1:
        return ValueCode(CodeKind.VALID, bits.index(1), bits)
    return ValueCode(CodeKind.FORBIDDEN, None, bits)


def ledr_next(current: Sequence[int], value: int) -> Bits:
    """Next (data, repeat) pair after transmitting ``value``.

    A changed value toggles the data wire; a repeated value toggles the
    repeat wire.  Exactly one wire differs from ``current``.
    """
    if value not in (0, 1):
        raise EncodingError(f"LEDR value {value} is not a bit")
    d, r = current
    if value != d:
        return (value, r)
    return (d, r ^ 1)


def edge_next(current: Sequence[int], value: int) -> Bits:
    """Toggle wire ``value``; all other wires are unchanged."""
    if not 0 <= value < len(current):
        raise EncodingError(f"edge value {value} out of range for {len(current)} wires")
    return tuple(b ^ 1 if i == value else b for i, b in enumerate(current))


def signal_parity(wires: Sequence[int]) -> int:
    """Parity of the Hamming weight; the phase of a two-phase signal."""
    p = 0
    for b in wires:
        p ^= int(b)
    return p
