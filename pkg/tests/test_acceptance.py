"""Acceptance gate: every criterion at its stated tolerance and budget.

Each test runs one verification family at full scale, prints a single
pass/fail line, and fails if any check inside the family fails or the
family exceeds its runtime budget.
"""

import time

import pytest

from isw import verify

CRITERIA = [
    # (number, description, family callable, runtime budget in seconds)
    (1, "stationary law == multinomial, Linf < 1e-10", verify.check_theorem1, 10),
    (2, "exact divergence <= occupancy bound on [w, 50w]", verify.check_theorem2, 30),
    (3, "bound tracks e^-b at t = w ln w + bw", verify.check_corollary, 5),
    (4, "mean bias < e^(-t/w) exactly + Monte Carlo within 3se", verify.check_theorem3, 60),
    (5, "box-model law == window law, exact, exhaustive", verify.check_swrre, 10),
    (6, "occupancy == surjections/w^t and bound == -log2", verify.check_occupancy, 1),
    (7, "tree select == naive, bit-exact replay, touch bound", verify.check_sumtree, 30),
    (8, "count storage <= 2m words of ceil(log2(w+1)) bits", verify.check_memory, 30),
    (9, "200-stream round trip + entropy within 0.2 bits/sym", verify.check_coder, 60),
    (10, "regime change: divergence < 0.05 bits inside horizon", verify.check_adaptation, 30),
]


@pytest.mark.parametrize("number,description,family,budget", CRITERIA,
                         ids=[f"criterion-{n:02d}" for n, *_ in CRITERIA])
def test_acceptance(number, description, family, budget):
    start = time.perf_counter()
    checks = family()
    elapsed = time.perf_counter() - start
    failed = [c for c in checks if not c.passed]
    status = "FAIL" if failed else "PASS"
    print(f"[{status}] criterion {number:2d}: {description} "
          f"({len(checks)} checks, {elapsed:.1f}s)")
    for check in failed:
        print("    " + check.line())
    assert not failed, f"criterion {number}: {[c.name for c in failed]}"
    assert elapsed < budget, f"criterion {number} took {elapsed:.1f}s (budget {budget}s)"
