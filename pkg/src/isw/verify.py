"""Machine checks for the library's mathematical guarantees.

Each family re-derives a claim from an independent route and compares it
against the implementation: stationarity of the eviction chain against the
closed-form multinomial, the divergence bound against exact chain evolution,
the mean-bias bound against the closed form and Monte Carlo, the box-model
distributional equivalence by exhaustive enumeration, tree selection against
the linear scan, the storage claim by counting words, and the coder by
round-trips.  The CLI ``verify`` subcommand and the acceptance test suite
both run these.
"""

from __future__ import annotations

import io
import math
import time
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import analysis, coder, core
from .analysis import (
    CompositionIndex,
    build_transition_matrix,
    evolve_distribution,
    expected_count_exact,
    geometric_checkpoints,
    kl_bound,
    kl_bound_asymptotic,
    kl_divergence,
    monte_carlo_frequencies,
    multinomial_chain,
    occupancy_all_replaced,
    point_mass,
    simulate_chain,
    stationary_distribution,
    surjection_count,
)
from .bits import SeededBitSource
from .core import IswState, balanced_counts
from .sumtree import SumTree


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}" + (f"  ({self.detail})" if self.detail else "")


# -- exact-law oracles -------------------------------------------------------


def isw_exact_law(
    initial_counts: Sequence[int], p: Sequence[Fraction], t: int
) -> dict[tuple[int, ...], Fraction]:
    """Exact law of the count vector after t steps, by enumerating every
    (eviction draw, incoming symbol) outcome through the implemented
    selection rule."""
    w = sum(initial_counts)
    law = {tuple(initial_counts): Fraction(1)}
    inv_w = Fraction(1, w)
    for _ in range(t):
        nxt: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for state, q in law.items():
            for x, px in enumerate(p, start=1):
                if px == 0:
                    continue
                for z in range(w):
                    j = core.select_naive(state, z)
                    dest = list(state)
                    dest[j - 1] -= 1
                    dest[x - 1] += 1
                    nxt[tuple(dest)] += q * px * inv_w
        law = dict(nxt)
    return law


def swrre_exact_law(
    initial_boxes: Sequence[int], m: int, p: Sequence[Fraction], t: int
) -> dict[tuple[int, ...], Fraction]:
    """Exact law of the box-model count vector after t steps, enumerated on
    the full box-configuration space (every box choice times every incoming
    symbol), then projected to count vectors."""
    w = len(initial_boxes)
    inv_w = Fraction(1, w)
    configs = {tuple(initial_boxes): Fraction(1)}
    for _ in range(t):
        nxt: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for cfg, q in configs.items():
            for box in range(w):
                for x, px in enumerate(p, start=1):
                    if px == 0:
                        continue
                    dest = list(cfg)
                    dest[box] = x
                    nxt[tuple(dest)] += q * px * inv_w
        configs = dict(nxt)
    law: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    for cfg, q in configs.items():
        counts = [0] * m
        for s in cfg:
            counts[s - 1] += 1
        law[tuple(counts)] += q
    return dict(law)


# -- families ----------------------------------------------------------------


def check_theorem1() -> list[Check]:
    """Stationary law of the eviction chain == multinomial, L-inf < 1e-10."""
    checks = []
    cases = [(2, (0.5, 0.5)), (2, (0.7, 0.3)), (3, (0.2, 0.3, 0.5))]
    for m, p in cases:
        for w in range(2, 7):
            model = build_transition_matrix(m, w, p)
            pi = stationary_distribution(model)
            ref = multinomial_chain(model.index, p)
            err = float(np.max(np.abs(pi.probs - ref.probs)))
            checks.append(
                Check(
                    f"theorem1/stationary m={m} w={w} p={p}",
                    err < 1e-10,
                    f"Linf={err:.3e}",
                )
            )
    return checks


def _kl_bits_mp(reference: Sequence[Fraction], actual: Sequence[Fraction]):
    """High-precision divergence in bits between exact distributions.

    Needed because for large t the true gap to the occupancy bound shrinks
    like (1-1/w)^t, far below what double precision can resolve from a
    float-evolved chain.
    """
    import mpmath as mp

    total = mp.mpf(0)
    for r, a in zip(reference, actual):
        if r > 0:
            if a == 0:
                raise ValueError("divergence is infinite")
            total += mp.mpf(r.numerator) / r.denominator * mp.log(mp.mpmathify(r / a), 2)
    return total


def check_theorem2() -> list[Check]:
    """Exact divergence to the limit law never exceeds the occupancy bound,
    from a point-mass start, for every t in [w, 50w].

    The chain is evolved in exact rationals and both sides of the inequality
    are evaluated at 240-bit precision; the smallest true margins (~(1-1/w)^t
    bits at t = 50w) sit far below double precision's noise floor.
    """
    import mpmath as mp

    checks = []
    half = (Fraction(1, 2), Fraction(1, 2))
    with mp.workprec(240):
        for w in (4, 8):
            model = build_transition_matrix(2, w, half, exact=True)
            reference = multinomial_chain(model.index, half).probs
            dist = point_mass(model.index, (w, 0), exact=True)
            worst_margin = mp.inf
            ok = True
            t = 0
            for ck in range(w, 50 * w + 1):
                dist = evolve_distribution(model, dist, ck - t)
                t = ck
                r = _kl_bits_mp(reference, dist.probs)
                inner = occupancy_all_replaced(w, t)
                bound = -mp.log(mp.mpmathify(inner), 2)
                worst_margin = min(worst_margin, bound - r)
                if r > bound:
                    ok = False
            try:
                kl_bound(w, w - 1)
                defined_early = True
            except ValueError:
                defined_early = False
            checks.append(
                Check(
                    f"theorem2/kl-bound m=2 w={w} init=({w},0)",
                    ok and not defined_early,
                    f"min(bound-R)={mp.nstr(worst_margin, 3)} bits over t in [{w},{50*w}]",
                )
            )
    return checks


def check_corollary() -> list[Check]:
    """At t = w ln w + b w the bound is within a small constant factor of
    exp(-b); the bound is bit-valued, the exponential form nat-valued."""
    checks = []
    w = 32
    for b in (1, 2, 3):
        t = round(w * math.log(w) + b * w)
        bound_nats = kl_bound(w, t) * math.log(2)
        lam = kl_bound_asymptotic(w, t)
        target = math.exp(-b)
        ok = 0.3 * target <= bound_nats <= 3 * target
        checks.append(
            Check(
                f"corollary/scaling w={w} b={b} t={t}",
                ok,
                f"bound={bound_nats:.4g} nats, e^-b={target:.4g}, lambda={lam:.4g}",
            )
        )
    return checks


def check_theorem3(trials: int = 100_000, seed: int = 2024) -> list[Check]:
    """Mean-count bias: |E(count)/w - p| < exp(-t/w) exactly, and Monte
    Carlo means sit within 3 standard errors of the closed form."""
    checks = []
    for w in (4, 16, 64):
        for p1 in (Fraction(3, 10), Fraction(9, 10)):
            for e0 in (Fraction(0), Fraction(1)):
                ok = True
                worst = 0.0
                pi_t = Fraction(1)
                decay = Fraction(w - 1, w)
                for t in range(1, 20 * w + 1):
                    pi_t *= decay
                    bias = pi_t * abs(e0 - p1)  # == |E/w - p1| exactly
                    limit = math.exp(-t / w)
                    if not bias < limit:
                        ok = False
                    worst = max(worst, float(bias) / limit)
                checks.append(
                    Check(
                        f"theorem3/closed-form w={w} p1={p1} e0={e0}",
                        ok,
                        f"max bias/limit={worst:.4f}",
                    )
                )
    w, m, p1 = 16, 2, Fraction(3, 10)
    e0 = Fraction(balanced_counts(m, w)[0], w)
    for t in (8, 32, 128):
        mc = monte_carlo_frequencies(
            m, w, (float(p1), 1 - float(p1)), t, trials, seed + t, want_distribution=False
        )
        target = float(expected_count_exact(w, p1, e0, t))
        dev = abs(float(mc.mean_counts[0]) - target)
        limit = 3 * float(mc.stderr[0])
        checks.append(
            Check(
                f"theorem3/monte-carlo w={w} t={t} trials={trials}",
                dev <= limit,
                f"|mean-E|={dev:.4g} vs 3se={limit:.4g}",
            )
        )
    return checks


def check_swrre() -> list[Check]:
    """Count-vector law of the box model == law of the imaginary window,
    exactly, for every initial composition (m=2, w in {2,3}, t <= 5)."""
    checks = []
    ps = [
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(3, 4), Fraction(1, 4)),
    ]
    for w in (2, 3):
        for p in ps:
            ok = True
            bad = ""
            for initial in analysis.compositions(2, w):
                boxes = [1] * initial[0] + [2] * initial[1]
                for t in range(0, 6):
                    lhs = isw_exact_law(initial, p, t)
                    rhs = swrre_exact_law(boxes, 2, p, t)
                    if lhs != rhs:
                        ok = False
                        bad = f"diverges at init={initial} t={t}"
                        break
                if not ok:
                    break
            checks.append(
                Check(
                    f"swrre/law-equality w={w} p=({p[0]},{p[1]})",
                    ok,
                    bad or "all initial compositions, t<=5, exact",
                )
            )
    checks.append(_swrre_conditional_multinomial())
    return checks


def _swrre_conditional_multinomial() -> Check:
    """Conditioned on every box replaced, the box-model counts are exactly
    multinomial (m=2, w=2, t=3), by enumerating box and symbol choices."""
    m, w, t = 2, 2, 3
    p = (Fraction(2, 3), Fraction(1, 3))
    joint: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    phi0_mass = Fraction(0)
    inv_w = Fraction(1, w)
    paths = [([1, 1], [False] * w, Fraction(1))]
    for _ in range(t):
        nxt = []
        for boxes, touched, q in paths:
            for box in range(w):
                for x, px in enumerate(p, start=1):
                    b2 = list(boxes)
                    b2[box] = x
                    t2 = list(touched)
                    t2[box] = True
                    nxt.append((b2, t2, q * px * inv_w))
        paths = nxt
    for boxes, touched, q in paths:
        if all(touched):
            phi0_mass += q
            counts = [0] * m
            for s in boxes:
                counts[s - 1] += 1
            joint[tuple(counts)] += q
    ok = phi0_mass > 0
    for n in analysis.compositions(m, w):
        expected = analysis.multinomial_pmf(w, p, n)
        if joint.get(n, Fraction(0)) / phi0_mass != expected:
            ok = False
    return Check(
        "swrre/conditional-multinomial m=2 w=2 t=3",
        ok,
        f"P(all replaced)={phi0_mass}",
    )


def check_occupancy() -> list[Check]:
    """Alternating occupancy sum == surjection count / w^t (exact), and the
    divergence bound is its negative base-2 log."""
    ok_identity = True
    ok_bound = True
    for w in range(1, 9):
        for t in range(0, 17):
            occ = occupancy_all_replaced(w, t)
            if occ != Fraction(surjection_count(t, w), w**t):
                ok_identity = False
            if occ > 0:
                expect = math.log2(occ.denominator) - math.log2(occ.numerator)
                if kl_bound(w, t) != expect:
                    ok_bound = False
            else:
                try:
                    kl_bound(w, t)
                    ok_bound = False
                except ValueError:
                    pass
    return [
        Check("occupancy/surjection-identity w<=8 t<=16", ok_identity, "exact rationals"),
        Check("occupancy/bound-log-identity w<=8 t<=16", ok_bound),
    ]


def check_sumtree(seed: int = 7) -> list[Check]:
    """Tree selection == linear-scan selection (exhaustive and randomized),
    coupled replay equals the count-vector update bit for bit, and per-step
    node touches stay within 3*(log2 m + 1)."""
    checks = []

    ok = True
    for counts in analysis.compositions(4, 6):
        tree = SumTree(counts)
        for z in range(6):
            if tree.select(z) != core.select_naive(counts, z):
                ok = False
    checks.append(Check("sumtree/select-vs-naive exhaustive m=4 w=6", ok, "all compositions, all z"))

    rng = np.random.default_rng(seed)
    m, w = 256, 2**16
    ok = True
    for _ in range(1000):
        counts = rng.multinomial(w, np.full(m, 1 / m)).tolist()
        tree = SumTree(counts)
        z = int(rng.integers(0, w))
        if tree.select(z) != core.select_naive(counts, z):
            ok = False
    checks.append(Check("sumtree/select-vs-naive random m=256 w=2^16", ok, "1000 cases"))

    m, w, steps = 16, 64, 10_000
    state = IswState(m, w)
    tree = SumTree.balanced(m, w)
    tree.count_touches = True
    bits_a = SeededBitSource(99)
    bits_b = SeededBitSource(99)
    sym_rng = np.random.default_rng(seed + 1)
    symbols = sym_rng.integers(1, m + 1, size=steps)
    replay_ok = True
    touch_limit = 3 * ((m - 1).bit_length() + 1)
    touches_ok = True
    for sym in symbols:
        state.step(int(sym), bits_a)
        tree.step(int(sym), bits_b)
        if tree.last_touches > touch_limit:
            touches_ok = False
        if tree.leaves != state.counts:
            replay_ok = False
            break
    tree.validate()
    checks.append(
        Check(
            f"sumtree/coupled-replay m={m} w={w} steps={steps}",
            replay_ok,
            "leaf vector equals count vector after every step",
        )
    )
    checks.append(
        Check(
            f"sumtree/touch-bound m={m}",
            touches_ok,
            f"per-step touches <= {touch_limit}",
        )
    )
    return checks


def check_memory() -> list[Check]:
    """Storage claim: the tree is at most 2m words of ceil(log2(w+1)) bits,
    exponentially below the w*ceil(log2 m) bits of a literal buffer."""
    m, w = 256, 2**20
    tree = SumTree.balanced(m, w)
    word_bits = w.bit_length()  # == ceil(log2(w+1))
    nodes = tree.node_count
    tree_bits = nodes * word_bits
    counts_bits = m * word_bits
    buffer_bits = w * (m - 1).bit_length()
    fits = tree.total <= (1 << word_bits) - 1  # root is the largest node
    ok = nodes <= 2 * m and tree_bits <= 2 * m * word_bits and fits
    ok = ok and counts_bits < buffer_bits and tree_bits < buffer_bits
    return [
        Check(
            f"memory/storage m={m} w=2^20",
            ok,
            f"tree={tree_bits}b counts={counts_bits}b buffer={buffer_bits}b",
        )
    ]


def _random_symbols(rng: np.random.Generator, m: int, n: int, skew: bool) -> list[int]:
    if n == 0:
        return []
    if skew:
        pvals = rng.dirichlet(np.full(m, 0.5))
        return (rng.choice(m, size=n, p=pvals) + 1).tolist()
    return rng.integers(1, m + 1, size=n).tolist()


def coder_cases(n_streams: int, seed: int = 0xC0DE):
    """Deterministic spread of round-trip cases: m in {2,256}, mu in {0,1,2},
    both rng modes, assorted w, lengths log-uniform with a pinned handful at
    the 1e5 scale."""
    rng = np.random.default_rng(seed)
    pinned = [
        (2, 0, 1024, "seeded-prng", 100_000),
        (2, 2, 256, "self-feed", 100_000),
        (256, 0, 4096, "seeded-prng", 100_000),
        (256, 1, 1024, "self-feed", 100_000),
    ]
    cases = pinned[: min(len(pinned), n_streams)]
    modes = ("seeded-prng", "self-feed")
    ws = (16, 64, 256, 1024, 4096)
    while len(cases) < n_streams:
        m = int(rng.choice((2, 256)))
        mu = int(rng.integers(0, 3))
        w = int(rng.choice(ws))
        mode = modes[len(cases) % 2]
        length = max(mu, int(10 ** rng.uniform(0.7, 4.0)))
        cases.append((m, mu, w, mode, length))
    return cases


def check_coder(n_streams: int = 200, seed: int = 0xC0DE) -> list[Check]:
    """Round-trip identity over the case spread, plus compression within
    0.2 bits/symbol of the empirical entropy of a skewed binary source."""
    rng = np.random.default_rng(seed)
    failures = []
    for i, (m, mu, w, mode, length) in enumerate(coder_cases(n_streams, seed)):
        config = coder.CoderConfig(m=m, mu=mu, w=w, rng_mode=mode, seed=int(rng.integers(1 << 62)))
        symbols = _random_symbols(rng, m, length, skew=bool(i % 3))
        if len(symbols) < mu:
            symbols = list(range(1, mu + 1))
        stream = coder.encode(symbols, config)
        if coder.decode(stream) != symbols:
            failures.append((m, mu, w, mode, length))
    checks = [
        Check(
            f"coder/round-trip {n_streams} streams",
            not failures,
            f"failures={failures[:3]}" if failures else "m in {2,256}, mu in {0,1,2}, both modes",
        )
    ]

    n = 100_000
    sample = (rng.random(n) < 0.1).astype(int) + 1  # symbol 2 w.p. 0.1
    symbols = sample.tolist()
    freq = np.bincount(sample, minlength=3)[1:3] / n
    h_emp = float(-(freq[freq > 0] * np.log2(freq[freq > 0])).sum())
    config = coder.CoderConfig(m=2, mu=0, w=1024, rng_mode="seeded-prng", seed=42)
    stream = coder.encode(symbols, config)
    bps = 8 * len(stream) / n
    checks.append(
        Check(
            "coder/entropy p=(0.9,0.1) w=1024 n=1e5",
            abs(bps - h_emp) <= 0.2 and coder.decode(stream) == symbols,
            f"bits/symbol={bps:.4f} empirical-entropy={h_emp:.4f}",
        )
    )
    return checks


def check_adaptation() -> list[Check]:
    """After a regime switch the exact divergence drops below 0.05 bits
    within 1.5*w*ln(w) + 4w steps, and the emitted CSV shows the crossing."""
    w, m = 32, 2
    horizon = math.ceil(1.5 * w * math.log(w) + 4 * w)
    rows = simulate_chain(
        m, w, (0.3, 0.7), geometric_checkpoints(horizon, 48), regime_p=(0.9, 0.1)
    )
    buf = io.StringIO()
    analysis.emit_csv(buf, rows, m)
    parsed = []
    lines = buf.getvalue().strip().splitlines()
    for line in lines[1:]:
        fields = line.split(",")
        parsed.append((int(fields[0]), float(fields[2]) if fields[2] else None))
    starts_high = parsed[0][1] is not None and parsed[0][1] > 0.05
    crossing = next((t for t, r in parsed if r is not None and r <= 0.05), None)
    ok = starts_high and crossing is not None and crossing <= horizon
    return [
        Check(
            f"adaptation/regime-change w={w}",
            ok,
            f"R first <= 0.05 bits at t={crossing} (horizon {horizon})",
        )
    ]


FAMILIES: dict[str, Callable[[], list[Check]]] = {
    "theorem1": check_theorem1,
    "theorem2": check_theorem2,
    "corollary": check_corollary,
    "theorem3": check_theorem3,
    "swrre": check_swrre,
    "occupancy": check_occupancy,
    "sumtree": check_sumtree,
    "memory": check_memory,
    "coder": check_coder,
    "adaptation": check_adaptation,
}


def run(only: str | None = None, timings: dict[str, float] | None = None) -> list[Check]:
    if only is not None and only not in FAMILIES:
        raise ValueError(f"unknown family {only!r}; choose from {', '.join(FAMILIES)}")
    results = []
    for name, family in FAMILIES.items():
        if only is not None and name != only:
            continue
        start = time.perf_counter()
        results.extend(family())
        if timings is not None:
            timings[name] = time.perf_counter() - start
    return results
