"""Hierarchical partial sums over the count vector.

Stores pairwise sums of the counts up to a single root (= the window
length), in a flat heap array, so that the eviction selection and the two
per-step count adjustments each touch only ceil(log2 m)+1 nodes.  Leaf
counts fit in ceil(log2(w+1))-bit words; the whole structure is at most
2*M-1 such words for M = m rounded up to a power of two.

Set ``count_touches = True`` to route operations through instrumented
pure-Python loops that record how many nodes each operation visited.
"""

from __future__ import annotations

from array import array
from fractions import Fraction
from typing import Sequence

from . import _kernel
from .bits import BitSource
from .core import balanced_counts, draw_uniform


class SumTree:
    __slots__ = ("m", "_M", "_arr", "count_touches", "last_touches")

    def __init__(self, counts: Sequence[int]):
        counts = [int(c) for c in counts]
        if not counts:
            raise ValueError("counts must be nonempty")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        self.m = len(counts)
        self._M = 1 << (self.m - 1).bit_length() if self.m > 1 else 1
        arr = array("q", [0]) * (2 * self._M)  # slot 0: M, 1: root, M+i: leaf i
        arr[0] = self._M
        arr[self._M : self._M + self.m] = array("q", counts)
        for node in range(self._M - 1, 0, -1):
            arr[node] = arr[2 * node] + arr[2 * node + 1]
        self._arr = arr
        self.count_touches = False
        self.last_touches = 0

    @classmethod
    def balanced(cls, m: int, w: int) -> "SumTree":
        return cls(balanced_counts(m, w))

    # -- views ------------------------------------------------------------

    @property
    def total(self) -> int:
        return self._arr[1]

    @property
    def node_count(self) -> int:
        """Stored words: 2M-1 for M = leaf count padded to a power of two."""
        return 2 * self._M - 1

    @property
    def leaves(self) -> list[int]:
        return list(self._arr[self._M : self._M + self.m])

    def count(self, symbol: int) -> int:
        self._check_symbol(symbol)
        return self._arr[self._M + symbol - 1]

    def level(self, k: int) -> list[int]:
        """Level k of the hierarchy: k=1 is the (padded) leaf row, the last
        level is [root]."""
        depth = self._M.bit_length()  # number of levels
        if not 1 <= k <= depth:
            raise ValueError(f"level {k} out of range 1..{depth}")
        width = self._M >> (k - 1)
        return list(self._arr[width : 2 * width])

    def levels(self) -> list[list[int]]:
        return [self.level(k) for k in range(1, self._M.bit_length() + 1)]

    def _check_symbol(self, symbol: int) -> None:
        if not 1 <= symbol <= self.m:
            raise ValueError(f"symbol {symbol} out of range 1..{self.m}")

    def validate(self) -> None:
        arr = self._arr
        for node in range(1, self._M):
            if arr[node] != arr[2 * node] + arr[2 * node + 1]:
                raise AssertionError(f"node {node} does not equal its children")
        for leaf in range(self._M):
            if arr[self._M + leaf] < 0:
                raise AssertionError(f"leaf {leaf} negative")
        if any(arr[self._M + i] for i in range(self.m, self._M)):
            raise AssertionError("padding leaf became nonzero")

    # -- operations --------------------------------------------------------

    def select(self, z: int) -> int:
        """1-based index j with Q_j <= z < Q_{j+1}; matches the linear scan
        over the count vector for every z in [0, total-1]."""
        if not 0 <= z < self.total:
            raise ValueError(f"z {z} out of range 0..{self.total - 1}")
        if self.count_touches:
            return self._select_counted(z) + 1
        return _kernel.tree_select(self._arr, z) + 1

    def update(self, symbol: int, delta: int) -> "SumTree":
        self._check_symbol(symbol)
        if self._arr[self._M + symbol - 1] + delta < 0:
            raise ValueError("update would make a leaf negative")
        if self.count_touches:
            self._update_counted(symbol - 1, delta)
        else:
            _kernel.tree_update(self._arr, symbol - 1, delta)
        return self

    def prefix(self, symbol: int) -> int:
        """Sum of counts of symbols strictly below ``symbol``."""
        self._check_symbol(symbol)
        return _kernel.tree_prefix(self._arr, symbol - 1)

    def step(self, symbol: int, bits: BitSource) -> int:
        """One eviction step; identical state transformer to IswState.step
        under the same bit stream.  Returns the evicted index."""
        self._check_symbol(symbol)
        z = draw_uniform(bits, self.total)
        if self.count_touches:
            touches = 0
            evicted = self._select_counted(z)
            touches += self.last_touches
            self._update_counted(evicted, -1)
            touches += self.last_touches
            self._update_counted(symbol - 1, 1)
            self.last_touches += touches
            return evicted + 1
        return _kernel.tree_step(self._arr, z, symbol - 1) + 1

    # -- instrumented twins (node-visit accounting) -------------------------

    def _select_counted(self, z: int) -> int:
        arr = self._arr
        m_pad = arr[0]
        node = 1
        touches = 1
        while node < m_pad:
            node <<= 1
            if z >= arr[node]:
                z -= arr[node]
                node |= 1
            touches += 1
        self.last_touches = touches
        return node - m_pad

    def _update_counted(self, leaf: int, delta: int) -> None:
        arr = self._arr
        node = arr[0] + leaf
        touches = 0
        while node >= 1:
            arr[node] += delta
            touches += 1
            node >>= 1
        self.last_touches = touches

    # -- smoothed coding weights --------------------------------------------

    @property
    def coding_total(self) -> int:
        """Total of the smoothed weights 2*count+1 over the real alphabet."""
        return 2 * self.total + self.m

    def coding_interval(self, symbol: int) -> tuple[int, int]:
        self._check_symbol(symbol)
        return _kernel.tree_code_interval(self._arr, self.m, symbol - 1)

    def coding_find(self, value: int) -> tuple[int, int, int]:
        """(symbol, cum_lo, cum_hi) whose smoothed interval contains value."""
        if not 0 <= value < self.coding_total:
            raise ValueError("value out of range")
        leaf = _kernel.tree_code_find(self._arr, self.m, value)
        lo, hi = _kernel.tree_code_interval(self._arr, self.m, leaf)
        return leaf + 1, lo, hi

    def probability(self, symbol: int) -> Fraction:
        return Fraction(2 * self.count(symbol) + 1, self.coding_total)


def build(counts: Sequence[int]) -> SumTree:
    return SumTree(counts)


def isw_step_fast(tree: SumTree, symbol: int, bits: BitSource) -> SumTree:
    tree.step(symbol, bits)
    return tree
