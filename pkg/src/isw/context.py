"""Markov-order extension: one independent window per length-mu context.

A model of order mu keeps (up to) m**mu windows, one for each possible word
of the last mu symbols, plus the real mu-letter context buffer.  Windows are
materialized lazily on first visit — an untouched window is indistinguishable
from a freshly initialized one, so behavior matches eager allocation while
small inputs stay cheap.

All windows draw from the single bit source passed to ``step`` in arrival
order, which is what lets an encoder and a decoder stay in lockstep with one
shared randomness stream.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Sequence

from .bits import BitSource
from .sumtree import SumTree


class ContextModel:
    def __init__(self, m: int, mu: int, w: int, seed_context: Sequence[int] = ()):
        if m < 2:
            raise ValueError("alphabet size must be at least 2")
        if mu < 0:
            raise ValueError("order must be nonnegative")
        if w < 1:
            raise ValueError("window length must be positive")
        seed_context = tuple(seed_context)
        if len(seed_context) != mu:
            raise ValueError(f"seed context must have exactly {mu} symbols")
        for s in seed_context:
            if not 1 <= s <= m:
                raise ValueError(f"symbol {s} out of range 1..{m}")
        self.m = m
        self.mu = mu
        self.w = w
        self.windows: dict[tuple[int, ...], SumTree] = {}
        self._context = deque(seed_context, maxlen=mu)

    @property
    def context(self) -> tuple[int, ...]:
        return tuple(self._context)

    def window(self, context: tuple[int, ...] | None = None) -> SumTree:
        """Window for ``context`` (default: the current one), created at the
        default balanced initialization on first visit."""
        key = self.context if context is None else tuple(context)
        if len(key) != self.mu:
            raise ValueError(f"context must have {self.mu} symbols")
        tree = self.windows.get(key)
        if tree is None:
            tree = SumTree.balanced(self.m, self.w)
            self.windows[key] = tree
        return tree

    def probability(self, symbol: int) -> Fraction:
        return self.window().probability(symbol)

    def probabilities(self) -> list[Fraction]:
        tree = self.window()
        return [tree.probability(i) for i in range(1, self.m + 1)]

    def step(self, symbol: int, bits: BitSource) -> int:
        """Step the window keyed by the pre-step context, then shift the
        context.  Returns the evicted index of that window."""
        tree = self.window()
        evicted = tree.step(symbol, bits)
        self._context.append(symbol)
        return evicted


def new_context_model(
    m: int, mu: int, w: int, seed_context: Sequence[int] = ()
) -> ContextModel:
    return ContextModel(m, mu, w, seed_context)


def context_probability(model: ContextModel, symbol: int) -> Fraction:
    return model.probability(symbol)


def context_step(model: ContextModel, symbol: int, bits: BitSource) -> ContextModel:
    model.step(symbol, bits)
    return model
