"""The imaginary sliding window: a frequency vector with random eviction.

Instead of storing the last ``w`` symbols, only the vector of counts
``counts[i]`` (total always ``w``) is kept.  A step on incoming symbol ``x``
decrements one randomly chosen count — index ``j`` with probability
``counts[j] / w`` — and increments the count of ``x``, emulating the eviction
of a uniformly random window position.  One step consumes roughly
``log2(w)`` bits from a :class:`~isw.bits.BitSource`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .bits import BitSource


def balanced_counts(m: int, w: int) -> list[int]:
    """Default initialization: floor(w/m) each, remainder to the lowest indices."""
    base, rem = divmod(w, m)
    return [base + (1 if i < rem else 0) for i in range(m)]


def draw_uniform(bits: BitSource, w: int) -> int:
    """Draw z uniform on [0, w-1] from fair bits.

    Powers of two consume exactly log2(w) bits (their big-endian value);
    anything else takes ceil(log2 w) bits per attempt and rejects z >= w,
    which terminates with probability one and keeps z exactly uniform.
    """
    if w < 1:
        raise ValueError("w must be positive")
    if w == 1:
        return 0
    nbits = (w - 1).bit_length()
    if w & (w - 1) == 0:
        return bits.take(nbits)
    while True:
        z = bits.take(nbits)
        if z < w:
            return z


def select_naive(counts, z: int) -> int:
    """Map z in [0, total-1] to the 1-based index j with Q_j <= z < Q_{j+1}.

    Q_j is the sum of counts before index j, so over uniform z index j is hit
    exactly counts[j-1] times; zero-count indices are never returned.
    Accepts a count sequence or anything with a ``counts`` attribute.
    """
    counts = getattr(counts, "counts", counts)
    if z < 0:
        raise ValueError("z out of range")
    acc = 0
    for j, c in enumerate(counts, start=1):
        acc += c
        if z < acc:
            return j
    raise ValueError("z out of range")


class IswState:
    """Count vector of fixed total ``w`` over a 1-based alphabet of size ``m``."""

    __slots__ = ("m", "w", "counts")

    def __init__(self, m: int, w: int, initial: Sequence[int] | None = None):
        if m < 2:
            raise ValueError("alphabet size must be at least 2")
        if w < 1:
            raise ValueError("window length must be positive")
        self.m = m
        self.w = w
        if initial is None:
            self.counts = balanced_counts(m, w)
        else:
            counts = [int(c) for c in initial]
            if len(counts) != m:
                raise ValueError(f"initial counts must have {m} entries")
            if any(c < 0 for c in counts):
                raise ValueError("counts must be nonnegative")
            if sum(counts) != w:
                raise ValueError(f"counts must sum to {w}")
            self.counts = counts

    def copy(self) -> "IswState":
        return IswState(self.m, self.w, self.counts)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, IswState)
            and (self.m, self.w, self.counts) == (other.m, other.w, other.counts)
        )

    def __repr__(self) -> str:
        return f"IswState(m={self.m}, w={self.w}, counts={self.counts})"

    def _check_symbol(self, symbol: int) -> None:
        if not 1 <= symbol <= self.m:
            raise ValueError(f"symbol {symbol} out of range 1..{self.m}")

    def step(self, symbol: int, bits: BitSource) -> int:
        """Apply one update for the incoming symbol; returns the evicted index.

        The eviction index and the increment are applied as one simultaneous
        transition: if the evicted index equals the incoming symbol the state
        is unchanged.
        """
        self._check_symbol(symbol)
        z = draw_uniform(bits, self.w)
        evicted = select_naive(self.counts, z)
        self.counts[evicted - 1] -= 1
        self.counts[symbol - 1] += 1
        return evicted

    def probability(self, symbol: int) -> Fraction:
        """Smoothed estimate (2*count+1)/(2w+m); positive even at count 0."""
        self._check_symbol(symbol)
        return Fraction(2 * self.counts[symbol - 1] + 1, 2 * self.w + self.m)

    def probabilities(self) -> list[Fraction]:
        return [self.probability(i) for i in range(1, self.m + 1)]


def new_isw_state(m: int, w: int, initial: Sequence[int] | None = None) -> IswState:
    return IswState(m, w, initial)


def isw_step(state: IswState, symbol: int, bits: BitSource) -> IswState:
    """Functional spelling of :meth:`IswState.step`; mutates and returns state."""
    state.step(symbol, bits)
    return state


def estimate_probability(state: IswState, symbol: int) -> Fraction:
    return state.probability(symbol)
