"""Reference window models the randomized count vector is validated against.

``TrueWindow`` is the literal last-w-symbols buffer.  ``SwrreBoxes`` keeps w
boxes and replaces a uniformly chosen one per step; its count-vector process
has exactly the same transition law as the imaginary window, which makes it
the bridge oracle for distributional equality tests.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .bits import BitSource
from .core import draw_uniform


class TrueWindow:
    """Ring buffer of the last w symbols plus its derived histogram."""

    def __init__(self, symbols: Sequence[int], m: int):
        if m < 2:
            raise ValueError("alphabet size must be at least 2")
        symbols = list(symbols)
        if not symbols:
            raise ValueError("window must be seeded with w symbols")
        for s in symbols:
            if not 1 <= s <= m:
                raise ValueError(f"symbol {s} out of range 1..{m}")
        self.m = m
        self.w = len(symbols)
        self.buffer = deque(symbols)
        self.counts = [0] * m
        for s in symbols:
            self.counts[s - 1] += 1

    def step(self, symbol: int) -> int:
        """Push ``symbol``, evict the oldest; returns the evicted symbol."""
        if not 1 <= symbol <= self.m:
            raise ValueError(f"symbol {symbol} out of range 1..{self.m}")
        evicted = self.buffer.popleft()
        self.buffer.append(symbol)
        self.counts[evicted - 1] -= 1
        self.counts[symbol - 1] += 1
        return evicted


class SwrreBoxes:
    """w boxes, one uniformly chosen box overwritten per step.

    m >= 1 is allowed here (unlike the coding-side alphabet): the untouched-
    box count phi is a property of the box choices alone and is meaningful
    even for a degenerate one-letter alphabet.
    """

    def __init__(self, boxes: Sequence[int], m: int):
        if m < 1:
            raise ValueError("alphabet size must be at least 1")
        boxes = list(boxes)
        if not boxes:
            raise ValueError("need at least one box")
        for s in boxes:
            if not 1 <= s <= m:
                raise ValueError(f"symbol {s} out of range 1..{m}")
        self.m = m
        self.w = len(boxes)
        self.boxes = boxes
        self.touched = [False] * self.w

    @property
    def counts(self) -> list[int]:
        counts = [0] * self.m
        for s in self.boxes:
            counts[s - 1] += 1
        return counts

    def step(self, symbol: int, bits: BitSource) -> int:
        """Replace a uniformly random box with ``symbol``; returns the box index."""
        if not 1 <= symbol <= self.m:
            raise ValueError(f"symbol {symbol} out of range 1..{self.m}")
        box = draw_uniform(bits, self.w)
        self.boxes[box] = symbol
        self.touched[box] = True
        return box

    def untouched_count(self) -> int:
        """Number of boxes never overwritten since construction."""
        return self.touched.count(False)
