"""Exact and Monte-Carlo analysis of the random-eviction count process.

The count vector is a Markov chain on compositions of w into m parts.  This
module builds its transition matrix, finds the stationary law (which must be
multinomial), evolves finite-horizon laws, and evaluates the closed-form
convergence machinery: the divergence bound driven by the probability that
every window slot has been replaced, its large-t exponential form, and the
exact per-symbol mean bias.

Alternating occupancy sums are evaluated in exact rational arithmetic — in
floating point they cancel catastrophically — and only converted to floats
at the final logarithm.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import IO, Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_STATE_CAP = 100_000


def state_cap() -> int:
    """Exact-chain size cap; override with the ISW_STATE_CAP env var."""
    return int(os.environ.get("ISW_STATE_CAP", DEFAULT_STATE_CAP))


def compositions(m: int, w: int):
    """All length-m vectors of nonnegative integers summing to w,
    lexicographically."""
    if m == 1:
        yield (w,)
        return
    for first in range(w + 1):
        for rest in compositions(m - 1, w - first):
            yield (first,) + rest


class CompositionIndex:
    """Bijection between compositions of w into m parts and dense indices."""

    def __init__(self, m: int, w: int, cap: int | None = None):
        if m < 1 or w < 0:
            raise ValueError("need m >= 1 and w >= 0")
        cap = state_cap() if cap is None else cap
        n = comb(w + m - 1, m - 1)
        if n > cap:
            raise ValueError(f"state space has {n} compositions, above the cap {cap}")
        self.m = m
        self.w = w
        self.states: list[tuple[int, ...]] = list(compositions(m, w))
        self._index = {s: i for i, s in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def index_of(self, state: Sequence[int]) -> int:
        return self._index[tuple(state)]

    def state_at(self, i: int) -> tuple[int, ...]:
        return self.states[i]


@dataclass
class ChainDistribution:
    """Probability vector over a CompositionIndex (floats, or Fractions in
    exact mode)."""

    index: CompositionIndex
    probs: np.ndarray | list[Fraction]

    def __post_init__(self):
        if len(self.probs) != len(self.index):
            raise ValueError("probability vector does not match the state space")
        if self.is_exact:
            if any(q < 0 for q in self.probs):
                raise ValueError("negative probability")
            if sum(self.probs) != 1:
                raise ValueError("exact probabilities must sum to 1")
        else:
            self.probs = np.asarray(self.probs, dtype=float)
            if (self.probs < 0).any():
                raise ValueError("negative probability")
            if abs(float(self.probs.sum()) - 1.0) > 1e-12:
                raise ValueError("probabilities must sum to 1 within 1e-12")

    @property
    def is_exact(self) -> bool:
        return not isinstance(self.probs, np.ndarray) and isinstance(
            self.probs[0], Fraction
        )

    def mean_counts(self):
        """Expected count per symbol under this law."""
        if self.is_exact:
            means = [Fraction(0)] * self.index.m
            for state, q in zip(self.index.states, self.probs):
                for i, c in enumerate(state):
                    means[i] += q * c
            return means
        states = np.asarray(self.index.states, dtype=float)
        return self.probs @ states

    def tv_distance(self, other: "ChainDistribution") -> float:
        a = np.asarray([float(q) for q in self.probs])
        b = np.asarray([float(q) for q in other.probs])
        return 0.5 * float(np.abs(a - b).sum())

    def as_dict(self) -> dict[tuple[int, ...], float | Fraction]:
        return dict(zip(self.index.states, self.probs))


def multinomial_pmf(w: int, p: Sequence, n: Sequence[int]):
    """Multinomial probability of the composition n under cell probabilities p.

    Exact when p entries are Fractions, float otherwise.
    """
    if len(p) != len(n):
        raise ValueError("p and n must have the same length")
    if any(c < 0 for c in n) or sum(n) != w:
        raise ValueError(f"n must be a composition of {w}")
    _check_probability_vector(p)
    coeff = factorial(w)
    for c in n:
        coeff //= factorial(c)
    prob = coeff
    for pi, c in zip(p, n):
        prob = prob * pi**c
    return prob


def _check_probability_vector(p: Sequence) -> None:
    if any(pi < 0 for pi in p):
        raise ValueError("probabilities must be nonnegative")
    total = sum(p)
    if isinstance(total, Fraction):
        if total != 1:
            raise ValueError("probabilities must sum to 1")
    elif abs(float(total) - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")


def multinomial_chain(index: CompositionIndex, p: Sequence) -> ChainDistribution:
    """The multinomial law as a distribution over the composition index."""
    probs = [multinomial_pmf(index.w, p, s) for s in index.states]
    if probs and isinstance(probs[0], Fraction):
        return ChainDistribution(index, probs)
    return ChainDistribution(index, np.asarray(probs, dtype=float))


def point_mass(
    index: CompositionIndex, state: Sequence[int], exact: bool = False
) -> ChainDistribution:
    i = index.index_of(state)
    if exact:
        probs = [Fraction(0)] * len(index)
        probs[i] = Fraction(1)
        return ChainDistribution(index, probs)
    v = np.zeros(len(index))
    v[i] = 1.0
    return ChainDistribution(index, v)


@dataclass
class TransitionModel:
    """One-step law of the count-vector chain, over a CompositionIndex.

    float mode: scipy CSR matrix.  exact mode: per-row {column: Fraction}.
    """

    index: CompositionIndex
    matrix: sp.csr_matrix | list[dict[int, Fraction]]
    p: tuple
    exact: bool


def build_transition_matrix(
    m: int, w: int, p: Sequence, exact: bool = False, cap: int | None = None
) -> TransitionModel:
    """Row-stochastic transition matrix of the eviction chain.

    From state s: mass p[i] * s[j] / w moves to s + e_i - e_j for each j != i
    with s[j] > 0 (incoming symbol i, evicted index j); the diagonal collects
    sum_k p[k] * s[k] / w (increment cancels the decrement).
    """
    if len(p) != m:
        raise ValueError("p must have m entries")
    _check_probability_vector(p)
    p = tuple(Fraction(pi) if exact else float(pi) for pi in p)
    index = CompositionIndex(m, w, cap)
    n = len(index)

    if exact:
        rows: list[dict[int, Fraction]] = []
        for s in index.states:
            row: dict[int, Fraction] = {}
            r = index.index_of(s)
            diag = sum((pk * sk for pk, sk in zip(p, s)), Fraction(0)) / w
            if diag:
                row[r] = diag
            for i in range(m):
                if p[i] == 0:
                    continue
                for j in range(m):
                    if j == i or s[j] == 0:
                        continue
                    dest = list(s)
                    dest[i] += 1
                    dest[j] -= 1
                    c = index.index_of(dest)
                    row[c] = row.get(c, Fraction(0)) + p[i] * Fraction(s[j], w)
            rows.append(row)
        return TransitionModel(index, rows, p, True)

    data, ridx, cidx = [], [], []
    for r, s in enumerate(index.states):
        diag = sum(pk * sk for pk, sk in zip(p, s)) / w
        if diag:
            ridx.append(r)
            cidx.append(r)
            data.append(diag)
        for i in range(m):
            if p[i] == 0.0:
                continue
            for j in range(m):
                if j == i or s[j] == 0:
                    continue
                dest = list(s)
                dest[i] += 1
                dest[j] -= 1
                ridx.append(r)
                cidx.append(index.index_of(dest))
                data.append(p[i] * s[j] / w)
    matrix = sp.csr_matrix((data, (ridx, cidx)), shape=(n, n))
    return TransitionModel(index, matrix, p, False)


def stationary_distribution(
    model: TransitionModel, tol: float = 1e-12, max_iter: int = 10**6
) -> ChainDistribution:
    """Left fixed vector by power iteration to an L-infinity residual < tol.

    With some p[i] = 0 the chain is reducible; iteration then converges to
    the stationary law of the component reachable from the uniform start.
    """
    if model.exact:
        raise ValueError("power iteration runs in float mode")
    n = len(model.index)
    v = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = v @ model.matrix
        nxt /= nxt.sum()
        if float(np.max(np.abs(nxt - v))) < tol:
            return ChainDistribution(model.index, nxt)
        v = nxt
    raise RuntimeError(f"power iteration did not reach residual {tol} in {max_iter} steps")


def evolve_distribution(
    model: TransitionModel, initial: ChainDistribution, t: int
) -> ChainDistribution:
    """initial times M^t, via t sequential vector-matrix products."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if len(initial.index) != len(model.index) or initial.index.w != model.index.w:
        raise ValueError("distribution does not match the model's state space")
    if model.exact:
        if not initial.is_exact:
            raise ValueError("exact model needs an exact initial distribution")
        probs = list(initial.probs)
        for _ in range(t):
            nxt = [Fraction(0)] * len(probs)
            for r, q in enumerate(probs):
                if q:
                    for c, mass in model.matrix[r].items():
                        nxt[c] += q * mass
            probs = nxt
        return ChainDistribution(model.index, probs)
    v = np.array(initial.probs, dtype=float)
    for _ in range(t):
        v = v @ model.matrix
    return ChainDistribution(model.index, v)


def kl_divergence(reference, actual) -> float:
    """Kullback-Leibler divergence in bits, sum ref*log2(ref/actual) with
    0*log(0/x) = 0.  Raises ValueError where ref > 0 meets actual == 0."""
    ref = reference.probs if isinstance(reference, ChainDistribution) else reference
    act = actual.probs if isinstance(actual, ChainDistribution) else actual
    if len(ref) != len(act):
        raise ValueError("distributions must share a state space")
    total = 0.0
    for r, a in zip(ref, act):
        if r > 0:
            if a == 0:
                raise ValueError("divergence is infinite: actual misses a reference state")
            total += float(r) * math.log2(float(r) / float(a))
    return total


def surjection_count(t: int, w: int) -> int:
    """Number of surjections from t labelled draws onto w boxes (recurrence
    form; the independent oracle for the alternating occupancy sum)."""
    if t < 0 or w < 0:
        raise ValueError("need t, w >= 0")
    prev = [1] + [0] * w  # row t=0: only w=0 is coverable
    for _ in range(t):
        cur = [0] * (w + 1)
        for k in range(1, w + 1):
            cur[k] = k * (prev[k] + prev[k - 1])
        prev = cur
    return prev[w]


def occupancy_all_replaced(w: int, t: int) -> Fraction:
    """Probability that t uniform draws over w boxes touch every box,
    as the exact alternating sum sum_k (-1)^k C(w,k) (1 - k/w)^t."""
    if w < 1 or t < 0:
        raise ValueError("need w >= 1 and t >= 0")
    num = sum((-1) ** k * comb(w, k) * (w - k) ** t for k in range(w + 1))
    return Fraction(num, w**t)


def kl_bound(w: int, t: int) -> float:
    """Upper bound on the divergence to the limit law, in bits:
    -log2 P{all w slots replaced by time t}.

    Undefined (raises ValueError) while that probability is zero, i.e. for
    t < w.
    """
    inner = occupancy_all_replaced(w, t)
    if inner <= 0:
        raise ValueError(f"bound undefined: no full replacement by t={t} for w={w}")
    # log2 on the big-integer parts; float(inner) could under/overflow.
    return math.log2(inner.denominator) - math.log2(inner.numerator)


def kl_bound_asymptotic(w: int, t: int) -> float:
    """Large-t exponential form w * exp(-t/w), in nats (divide by ln 2
    before comparing against the bit-valued bound)."""
    if w < 1:
        raise ValueError("w must be positive")
    return w * math.exp(-t / w)


def expected_count_exact(w: int, p_i, e0, t: int):
    """Exact mean count of one symbol after t steps.

    e0 is the initial per-slot probability of holding the symbol (initial
    count / w).  Exact Fractions in, exact Fraction out.
    """
    if not 0 <= e0 <= 1:
        raise ValueError("e0 must be in [0, 1]")
    if t < 0:
        raise ValueError("t must be nonnegative")
    pi_t = Fraction(w - 1, w) ** t
    return w * (1 - pi_t) * p_i + w * pi_t * e0


@dataclass
class MonteCarloResult:
    mean_counts: np.ndarray
    stderr: np.ndarray
    distribution: ChainDistribution | None
    trials: int


def monte_carlo_frequencies(
    m: int,
    w: int,
    p: Sequence[float],
    t: int,
    trials: int,
    seed: int,
    initial: Sequence[int] | None = None,
    initial_p: Sequence[float] | None = None,
    index: CompositionIndex | None = None,
    want_distribution: bool = True,
) -> MonteCarloResult:
    """Empirical law of the count vector after t steps over independent runs.

    Per step and trial, the incoming symbol is drawn from p and the evicted
    index uniformly via the cumulative counts — the same transition law the
    sequential structure implements, vectorized across trials.  Fully
    reproducible from (parameters, seed); results do not depend on how
    trials would be partitioned across workers.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if len(p) != m:
        raise ValueError("p must have m entries")
    _check_probability_vector(p)
    rng = np.random.default_rng(seed)
    counts = _mc_initial_counts(m, w, trials, initial, initial_p, rng)
    pcum = np.cumsum(np.asarray(p, dtype=float))
    rows = np.arange(trials)
    for _ in range(t):
        _mc_step(counts, pcum, w, rows, rng)
    return _mc_result(counts, m, w, trials, index, want_distribution)


def _mc_initial_counts(m, w, trials, initial, initial_p, rng):
    from .core import balanced_counts

    if initial_p is not None:
        return rng.multinomial(w, np.asarray(initial_p, dtype=float), size=trials).astype(
            np.int64
        )
    start = balanced_counts(m, w) if initial is None else list(initial)
    if len(start) != m or sum(start) != w or any(c < 0 for c in start):
        raise ValueError("initial must be a composition of w into m parts")
    return np.tile(np.asarray(start, dtype=np.int64), (trials, 1))


def _mc_step(counts, pcum, w, rows, rng):
    incoming = np.searchsorted(pcum, rng.random(len(rows)), side="right")
    np.clip(incoming, 0, counts.shape[1] - 1, out=incoming)
    z = rng.integers(0, w, size=len(rows))
    evicted = (counts.cumsum(axis=1) <= z[:, None]).sum(axis=1)
    counts[rows, evicted] -= 1
    counts[rows, incoming] += 1


def _mc_result(counts, m, w, trials, index, want_distribution):
    mean_counts = counts.mean(axis=0)
    if trials > 1:
        stderr = counts.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        stderr = np.zeros(m)
    distribution = None
    if want_distribution:
        if index is None:
            try:
                index = CompositionIndex(m, w)
            except ValueError:
                index = None
        if index is not None:
            probs = np.zeros(len(index))
            states, freq = np.unique(counts, axis=0, return_counts=True)
            for state, f in zip(states, freq):
                probs[index.index_of(tuple(int(c) for c in state))] = f / trials
            distribution = ChainDistribution(index, probs)
    return MonteCarloResult(mean_counts, stderr, distribution, trials)


# -- simulation rows for the CLI -------------------------------------------


@dataclass
class SimRow:
    t: int
    mode: str
    r_bits: float | None
    bound_bits: float | None
    lambda_nats: float
    mean_counts: list[float]


CSV_BASE_COLUMNS = ["t", "mode", "r_t_bits", "kl_bound_bits", "lambda_nats"]


def geometric_checkpoints(t_max: int, points: int = 48) -> list[int]:
    """Geometrically spaced integer checkpoints in [1, t_max]."""
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    raw = np.unique(np.rint(np.geomspace(1, t_max, points)).astype(int))
    return [int(t) for t in raw if 1 <= t <= t_max]


def simulate_chain(
    m: int,
    w: int,
    p: Sequence[float],
    checkpoints: Sequence[int],
    trials: int = 0,
    seed: int = 0,
    regime_p: Sequence[float] | None = None,
    cap: int | None = None,
) -> list[SimRow]:
    """Rows of (t, divergence to the limit law, bound, asymptotic form,
    mean counts) at the requested checkpoints.

    trials == 0 runs the exact chain (state space must fit the cap);
    trials > 0 evolves a Monte-Carlo ensemble instead.  regime_p, when
    given, is the pre-switch source: the chain starts from its limit law
    under regime_p and adapts to p from t = 0.
    """
    checkpoints = sorted(set(int(t) for t in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive")
    if trials == 0:
        return _simulate_exact(m, w, p, checkpoints, regime_p, cap)
    return _simulate_mc(m, w, p, checkpoints, trials, seed, regime_p, cap)


def _row(t, mode, reference, dist, w, means):
    try:
        r_bits = kl_divergence(reference, dist) if dist is not None else None
    except ValueError:
        r_bits = float("inf")
    try:
        bound = kl_bound(w, t)
    except ValueError:
        bound = None
    return SimRow(t, mode, r_bits, bound, kl_bound_asymptotic(w, t), list(map(float, means)))


def _simulate_exact(m, w, p, checkpoints, regime_p, cap):
    from .core import balanced_counts

    model = build_transition_matrix(m, w, p, cap=cap)
    reference = multinomial_chain(model.index, p)
    if regime_p is not None:
        _check_probability_vector(regime_p)
        dist = multinomial_chain(model.index, regime_p)
    else:
        dist = point_mass(model.index, balanced_counts(m, w))
    rows = []
    t = 0
    for ck in checkpoints:
        dist = evolve_distribution(model, dist, ck - t)
        t = ck
        rows.append(_row(t, "exact", reference, dist, w, dist.mean_counts()))
    return rows


def _simulate_mc(m, w, p, checkpoints, trials, seed, regime_p, cap):
    try:
        index = CompositionIndex(m, w, cap)
        reference = multinomial_chain(index, p)
    except ValueError:
        index = None
        reference = None
    rng = np.random.default_rng(seed)
    counts = _mc_initial_counts(m, w, trials, None, regime_p, rng)
    pcum = np.cumsum(np.asarray(p, dtype=float))
    rows_idx = np.arange(trials)
    rows = []
    t = 0
    for ck in checkpoints:
        for _ in range(ck - t):
            _mc_step(counts, pcum, w, rows_idx, rng)
        t = ck
        result = _mc_result(counts, m, w, trials, index, index is not None)
        rows.append(_row(t, "mc", reference, result.distribution, w, result.mean_counts))
    return rows


def emit_csv(fp: IO[str], rows: Sequence[SimRow], m: int) -> None:
    """Stable schema, one record per checkpoint, 12 significant digits."""
    writer = csv.writer(fp)
    writer.writerow(CSV_BASE_COLUMNS + [f"mean_count_{i}" for i in range(1, m + 1)])

    def fmt(x):
        return "" if x is None else f"{x:.12g}"

    for row in rows:
        writer.writerow(
            [row.t, row.mode, fmt(row.r_bits), fmt(row.bound_bits), fmt(row.lambda_nats)]
            + [fmt(c) for c in row.mean_counts]
        )
