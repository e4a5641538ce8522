"""Deterministic sources of fair bits for the randomized eviction step.

Every piece of randomness in the library flows through one of these objects,
so a run is replayable from (mode, seed/table/fed bytes) alone.  Three modes:

* ``SeededBitSource`` — splitmix64 blocks, consumed most-significant-bit
  first.  Chosen over ``random.Random`` so that two processes (or two Python
  versions) with the same seed always see byte-identical streams; a codec
  depends on that.
* ``TableBitSource`` — a fixed, finite table of bits; raises when exhausted.
* ``SelfFeedBitSource`` — a 64-bit register recycled from bytes of an
  already-produced code stream, for coders that cannot transmit a seed's
  worth of randomness per symbol.
"""

from __future__ import annotations

from typing import Iterable

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer: a fixed bijection on 64-bit words."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def xorshift64(x: int) -> int:
    """One step of the xorshift64 linear feedback recurrence."""
    x &= _MASK64
    x ^= (x << 13) & _MASK64
    x ^= x >> 7
    x ^= (x << 17) & _MASK64
    return x


class BitSource:
    """Replayable stream of bits; ``take(k)`` is k successive bits, MSB first."""

    def take(self, count: int) -> int:
        raise NotImplementedError

    def next_bit(self) -> int:
        return self.take(1)


class SeededBitSource(BitSource):
    """Pseudo-random bits derived from a 64-bit seed via splitmix64."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._buf = 0
        self._nbits = 0

    def take(self, count: int) -> int:
        while self._nbits < count:
            self._state = (self._state + _GOLDEN) & _MASK64
            self._buf = (self._buf << 64) | mix64(self._state)
            self._nbits += 64
        self._nbits -= count
        out = self._buf >> self._nbits
        self._buf &= (1 << self._nbits) - 1
        return out


class TableBitSource(BitSource):
    """Bits served in order from a fixed table; exhaustion is an error."""

    def __init__(self, bits: Iterable[int]):
        self._bits = list(bits)
        if any(b not in (0, 1) for b in self._bits):
            raise ValueError("table entries must be 0 or 1")
        self.position = 0

    @classmethod
    def from_bytes(cls, data: bytes) -> "TableBitSource":
        return cls((byte >> (7 - i)) & 1 for byte in data for i in range(8))

    def take(self, count: int) -> int:
        if self.position + count > len(self._bits):
            raise RuntimeError("bit table exhausted")
        out = 0
        for _ in range(count):
            out = (out << 1) | self._bits[self.position]
            self.position += 1
        return out


class SelfFeedBitSource(BitSource):
    """Bits recycled from bytes of a code stream both parties can see.

    A 64-bit shift register starts at the seed; ``feed_byte`` shifts a code
    byte in and refills the drain pool with a whitened image of the register.
    If 64 pool bits are drained with no byte fed in between, the register
    advances by one xorshift64 feedback step and the pool refills.  Two
    parties that feed identical bytes at identical points in their request
    sequence therefore observe identical bits.
    """

    def __init__(self, seed: int):
        self._reg = seed & _MASK64
        self._pool = mix64(self._reg ^ _GOLDEN)
        self._avail = 64
        self.recycle_count = 0

    def _recycle(self) -> None:
        self._reg = xorshift64(self._reg)
        self._pool = mix64(self._reg ^ _GOLDEN)
        self._avail = 64
        self.recycle_count += 1

    def feed_byte(self, byte: int) -> None:
        if not 0 <= byte <= 0xFF:
            raise ValueError("byte out of range")
        self._reg = ((self._reg << 8) | byte) & _MASK64
        self._pool = mix64(self._reg ^ _GOLDEN)
        self._avail = 64

    def feed_bytes(self, data: bytes) -> None:
        for byte in data:
            self.feed_byte(byte)

    def take(self, count: int) -> int:
        out = 0
        while count:
            if self._avail == 0:
                self._recycle()
            n = count if count < self._avail else self._avail
            out = (out << n) | (self._pool >> (64 - n))
            self._pool = (self._pool << n) & _MASK64
            self._avail -= n
            count -= n
        return out
