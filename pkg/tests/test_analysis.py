"""Chain analysis: matrix law, stationarity, divergence bounds, Monte Carlo."""

import io
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isw import (
    CompositionIndex,
    build_transition_matrix,
    evolve_distribution,
    expected_count_exact,
    kl_bound,
    kl_bound_asymptotic,
    kl_divergence,
    monte_carlo_frequencies,
    multinomial_pmf,
    occupancy_all_replaced,
    stationary_distribution,
    surjection_count,
)
from isw.analysis import (
    ChainDistribution,
    emit_csv,
    geometric_checkpoints,
    multinomial_chain,
    point_mass,
    simulate_chain,
)
from isw.verify import isw_exact_law


class TestMultinomialPmf:
    def test_simple_values(self):
        assert multinomial_pmf(2, (0.5, 0.5), (1, 1)) == pytest.approx(0.5)
        assert multinomial_pmf(3, (1.0, 0.0), (3, 0)) == pytest.approx(1.0)

    def test_against_window_content_enumeration(self):
        # P{histogram == (2,2)} by enumerating all 2^4 window contents
        p = (0.7, 0.3)
        total = 0.0
        for word in itertools.product((1, 2), repeat=4):
            if word.count(1) == 2:
                total += math.prod(p[s - 1] for s in word)
        assert multinomial_pmf(4, p, (2, 2)) == pytest.approx(total)
        assert total == pytest.approx(0.2646)

    def test_exact_mode(self):
        p = (Fraction(7, 10), Fraction(3, 10))
        assert multinomial_pmf(4, p, (2, 2)) == Fraction(6 * 49 * 9, 10**4)

    def test_validation(self):
        with pytest.raises(ValueError):
            multinomial_pmf(2, (0.5, 0.5), (1, 2))
        with pytest.raises(ValueError):
            multinomial_pmf(2, (0.5, 0.4), (1, 1))
        with pytest.raises(ValueError):
            multinomial_pmf(2, (0.5, 0.5), (1, 1, 0))


class TestCompositionIndex:
    def test_count_and_bijection(self):
        index = CompositionIndex(3, 5)
        assert len(index) == math.comb(5 + 2, 2)
        for i, state in enumerate(index):
            assert index.index_of(state) == i
            assert index.state_at(i) == state
            assert sum(state) == 5

    def test_cap_guard(self):
        with pytest.raises(ValueError):
            CompositionIndex(2, 10, cap=5)

    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv("ISW_STATE_CAP", "10")
        with pytest.raises(ValueError):
            build_transition_matrix(2, 20, (0.5, 0.5))


class TestTransitionMatrix:
    def test_rows_stochastic(self):
        model = build_transition_matrix(2, 3, (0.6, 0.4))
        sums = np.asarray(model.matrix.sum(axis=1)).ravel()
        assert np.allclose(sums, 1.0, atol=1e-15)

    def test_w1_hand_case(self):
        model = build_transition_matrix(2, 1, (0.6, 0.4))
        dense = model.matrix.toarray()
        i10 = model.index.index_of((1, 0))
        i01 = model.index.index_of((0, 1))
        assert dense[i10, i10] == pytest.approx(0.6)
        assert dense[i10, i01] == pytest.approx(0.4)

    def test_diagonal_from_one_step_enumeration(self):
        # at (1,1) with p=(1/2,1/2): stay iff increment cancels eviction
        model = build_transition_matrix(2, 2, (0.5, 0.5))
        dense = model.matrix.toarray()
        i = model.index.index_of((1, 1))
        assert dense[i, i] == pytest.approx(0.5)

    def test_rows_match_exact_step_law(self):
        p = (Fraction(7, 10), Fraction(3, 10))
        exact = build_transition_matrix(2, 3, p, exact=True)
        flt = build_transition_matrix(2, 3, (0.7, 0.3))
        dense = flt.matrix.toarray()
        for r, state in enumerate(exact.index.states):
            law = isw_exact_law(state, p, 1)
            for c, dest in enumerate(exact.index.states):
                expected = law.get(dest, Fraction(0))
                assert exact.matrix[r].get(c, Fraction(0)) == expected
                assert dense[r, c] == pytest.approx(float(expected), abs=1e-15)

    def test_p_length_checked(self):
        with pytest.raises(ValueError):
            build_transition_matrix(2, 3, (1.0,))


class TestStationary:
    def test_m2_w2_uniform(self):
        model = build_transition_matrix(2, 2, (0.5, 0.5))
        pi = stationary_distribution(model)
        expect = {(2, 0): 0.25, (1, 1): 0.5, (0, 2): 0.25}
        for state, value in expect.items():
            assert pi.probs[model.index.index_of(state)] == pytest.approx(value, abs=1e-12)

    def test_matches_multinomial_m2_w4(self):
        model = build_transition_matrix(2, 4, (0.7, 0.3))
        pi = stationary_distribution(model)
        ref = multinomial_chain(model.index, (0.7, 0.3))
        assert float(np.max(np.abs(pi.probs - ref.probs))) < 1e-10

    def test_degenerate_source_absorbs(self):
        model = build_transition_matrix(2, 3, (1.0, 0.0))
        pi = stationary_distribution(model)
        assert pi.probs[model.index.index_of((3, 0))] == pytest.approx(1.0, abs=1e-9)


class TestEvolve:
    def test_t0_identity(self):
        model = build_transition_matrix(2, 3, (0.6, 0.4))
        start = point_mass(model.index, (2, 1))
        out = evolve_distribution(model, start, 0)
        assert np.array_equal(out.probs, start.probs)

    def test_t1_is_matrix_row(self):
        model = build_transition_matrix(2, 3, (0.6, 0.4))
        r = model.index.index_of((3, 0))
        out = evolve_distribution(model, point_mass(model.index, (3, 0)), 1)
        assert np.allclose(out.probs, model.matrix.toarray()[r])

    def test_long_horizon_reaches_stationary(self):
        model = build_transition_matrix(2, 4, (0.7, 0.3))
        pi = stationary_distribution(model)
        out = evolve_distribution(model, point_mass(model.index, (4, 0)), 600)
        assert float(np.max(np.abs(out.probs - pi.probs))) < 1e-9

    def test_exact_agrees_with_float(self):
        p_exact = (Fraction(3, 5), Fraction(2, 5))
        exact = build_transition_matrix(2, 3, p_exact, exact=True)
        flt = build_transition_matrix(2, 3, (0.6, 0.4))
        d_exact = evolve_distribution(exact, point_mass(exact.index, (2, 1), exact=True), 4)
        d_flt = evolve_distribution(flt, point_mass(flt.index, (2, 1)), 4)
        for q_e, q_f in zip(d_exact.probs, d_flt.probs):
            assert q_f == pytest.approx(float(q_e), abs=1e-14)


class TestKlDivergence:
    def test_identical_is_zero(self):
        assert kl_divergence((0.3, 0.7), (0.3, 0.7)) == 0.0

    def test_hand_value(self):
        expect = 0.5 * math.log2(2) + 0.5 * math.log2(2 / 3)
        assert kl_divergence((0.5, 0.5), (0.25, 0.75)) == pytest.approx(expect)
        assert expect == pytest.approx(0.20752, abs=1e-5)

    def test_infinite_signalled(self):
        with pytest.raises(ValueError):
            kl_divergence((0.5, 0.5), (1.0, 0.0))

    def test_zero_reference_states_ignored(self):
        assert kl_divergence((1.0, 0.0), (0.5, 0.5)) == pytest.approx(1.0)

    @given(st.lists(st.integers(1, 50), min_size=2, max_size=6),
           st.lists(st.integers(1, 50), min_size=2, max_size=6))
    def test_nonnegative(self, a, b):
        n = min(len(a), len(b))
        ref = [x / sum(a[:n]) for x in a[:n]]
        act = [x / sum(b[:n]) for x in b[:n]]
        assert kl_divergence(ref, act) >= -1e-12


class TestOccupancy:
    def test_examples(self):
        assert occupancy_all_replaced(2, 2) == Fraction(1, 2)
        assert occupancy_all_replaced(3, 3) == Fraction(2, 9)

    def test_pigeonhole_zero_before_w(self):
        for w in range(1, 7):
            for t in range(w):
                assert occupancy_all_replaced(w, t) == 0

    def test_surjection_oracle(self):
        # independent recurrence route, exact rational equality
        for w in range(1, 9):
            for t in range(17):
                assert occupancy_all_replaced(w, t) == Fraction(surjection_count(t, w), w**t)

    def test_surjection_base_cases(self):
        assert surjection_count(0, 0) == 1
        assert surjection_count(3, 1) == 1
        assert surjection_count(2, 2) == 2
        assert surjection_count(3, 3) == 6


class TestKlBound:
    def test_hand_value_w2_t2(self):
        assert kl_bound(2, 2) == pytest.approx(1.0)

    def test_undefined_before_w(self):
        with pytest.raises(ValueError):
            kl_bound(2, 1)

    def test_small_at_long_horizon(self):
        assert kl_bound(4, 40) < 0.001

    def test_asymptotic_examples(self):
        assert kl_bound_asymptotic(4, 8) == pytest.approx(4 * math.exp(-2))
        w = 16
        assert kl_bound_asymptotic(w, w * math.log(w)) == pytest.approx(1.0)
        for b in (1, 2, 3):
            lam = kl_bound_asymptotic(w, w * math.log(w) + b * w)
            assert lam == pytest.approx(math.exp(-b))


class TestExpectedCount:
    def test_one_step_from_full_column(self):
        # oracle: from counts (2,0) any z evicts symbol 1, the incoming
        # symbol is 1 or 2 with probability 1/2 -> E[count_1] = (2+1)/2
        by_enumeration = Fraction(1, 2) * 2 + Fraction(1, 2) * 1
        assert expected_count_exact(2, Fraction(1, 2), Fraction(1), 1) == by_enumeration
        assert by_enumeration == Fraction(3, 2)

    def test_t0_is_initial_mass(self):
        assert expected_count_exact(5, 0.3, 0.8, 0) == pytest.approx(5 * 0.8)

    def test_long_horizon_reaches_wp(self):
        val = expected_count_exact(8, 0.3, 1.0, 2000)
        assert float(val) == pytest.approx(8 * 0.3, abs=1e-9)

    @given(st.integers(1, 40), st.integers(0, 300), st.fractions(0, 1), st.fractions(0, 1))
    @settings(max_examples=80)
    def test_bias_below_exponential(self, w, t, p_i, e0):
        bias = abs(expected_count_exact(w, p_i, e0, t) / w - p_i)
        assert bias <= (1 - Fraction(1, w)) ** t
        if t >= 1:
            assert bias < math.exp(-t / w)


class TestMonteCarlo:
    def test_single_trial_point_mass(self):
        mc = monte_carlo_frequencies(2, 4, (0.5, 0.5), t=3, trials=1, seed=0)
        assert np.count_nonzero(mc.distribution.probs) == 1
        assert mc.distribution.probs.max() == 1.0

    def test_deterministic_given_seed(self):
        a = monte_carlo_frequencies(2, 4, (0.3, 0.7), 20, 500, seed=5)
        b = monte_carlo_frequencies(2, 4, (0.3, 0.7), 20, 500, seed=5)
        assert np.array_equal(a.mean_counts, b.mean_counts)
        assert np.array_equal(a.distribution.probs, b.distribution.probs)

    def test_mean_tracks_closed_form(self):
        w, t = 4, 200
        mc = monte_carlo_frequencies(2, w, (0.5, 0.5), t, 100_000, seed=11)
        target = float(expected_count_exact(w, 0.5, 0.5, t))
        assert abs(mc.mean_counts[0] - target) <= 3 * mc.stderr[0] + 1e-9

    def test_tv_distance_to_exact_chain(self):
        m, w, t = 2, 3, 10
        mc = monte_carlo_frequencies(m, w, (0.5, 0.5), t, 100_000, seed=17)
        model = build_transition_matrix(m, w, (0.5, 0.5))
        exact = evolve_distribution(
            model, point_mass(model.index, tuple(__import__("isw").core.balanced_counts(m, w))), t
        )
        assert mc.distribution.tv_distance(exact) < 0.02

    def test_validation(self):
        with pytest.raises(ValueError):
            monte_carlo_frequencies(2, 4, (0.5, 0.5), 1, 0, seed=0)
        with pytest.raises(ValueError):
            monte_carlo_frequencies(2, 4, (0.5, 0.5), 1, 1, seed=0, initial=[1, 1])


class TestSimulate:
    def test_exact_rows_trend_and_bound(self):
        w = 8
        rows = simulate_chain(2, w, (0.5, 0.5), geometric_checkpoints(30 * w, 40))
        assert rows[0].r_bits > 0.1
        for a, b in zip(rows, rows[1:]):
            # monotone by the data-processing inequality; 1e-12 float slack
            assert b.r_bits <= a.r_bits + 1e-12
        # float-evaluated R carries ~1e-15 noise; the rigorous no-slack
        # comparison is the exact-arithmetic check in isw.verify
        for row in rows:
            if row.bound_bits is not None:
                assert row.r_bits <= row.bound_bits + 1e-12
        assert abs(rows[-1].r_bits) < 1e-6

    def test_regime_change_starts_at_burn_in_law(self):
        rows = simulate_chain(2, 4, (0.2, 0.8), [1, 5, 50], regime_p=(0.9, 0.1))
        assert rows[0].r_bits > 0.5  # far from the new limit law at t=1
        assert rows[-1].r_bits < 1e-3

    def test_mc_mode_rows(self):
        rows = simulate_chain(2, 3, (0.5, 0.5), [1, 4, 16], trials=2000, seed=3)
        assert all(row.mode == "mc" for row in rows)
        assert len(rows[0].mean_counts) == 2
        again = simulate_chain(2, 3, (0.5, 0.5), [1, 4, 16], trials=2000, seed=3)
        assert [r.mean_counts for r in rows] == [r.mean_counts for r in again]

    def test_checkpoint_validation(self):
        with pytest.raises(ValueError):
            simulate_chain(2, 3, (0.5, 0.5), [0, 2])
        with pytest.raises(ValueError):
            simulate_chain(2, 3, (0.5, 0.5), [])

    def test_csv_schema(self):
        rows = simulate_chain(2, 4, (0.5, 0.5), [1, 2, 4])
        buf = io.StringIO()
        emit_csv(buf, rows, 2)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "t,mode,r_t_bits,kl_bound_bits,lambda_nats,mean_count_1,mean_count_2"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[1] == "exact"
        assert first[3] == ""  # bound undefined at t=1 < w

    def test_geometric_checkpoints(self):
        cks = geometric_checkpoints(100, 20)
        assert cks[0] == 1 and cks[-1] == 100
        assert cks == sorted(set(cks))

    def test_bound_column_tracks_exponential_scaling(self):
        # checkpoints right at t = w ln w + b w: the bound (in nats) stays
        # within a factor of 2 of e^-b
        w = 16
        cks = [round(w * math.log(w) + b * w) for b in range(4)]
        rows = simulate_chain(2, w, (0.5, 0.5), cks)
        for b, row in enumerate(rows):
            bound_nats = row.bound_bits * math.log(2)
            assert math.exp(-b) / 2 <= bound_nats <= math.exp(-b) * 2


def test_chain_distribution_validation():
    index = CompositionIndex(2, 2)
    with pytest.raises(ValueError):
        ChainDistribution(index, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        ChainDistribution(index, np.array([0.5, 0.6, -0.1]))
    exact = ChainDistribution(index, [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)])
    assert exact.is_exact
    assert exact.mean_counts()[0] == Fraction(1)
