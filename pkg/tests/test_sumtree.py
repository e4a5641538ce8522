"""Partial-sum tree: structure, selection, updates, and replay equivalence."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from isw import IswState, SeededBitSource, SumTree, select_naive
from isw.analysis import compositions
from isw.sumtree import build, isw_step_fast


class TestBuild:
    def test_pairwise_sums(self):
        assert SumTree([1, 0, 3, 0]).levels() == [[1, 0, 3, 0], [1, 3], [4]]

    def test_balanced_w8(self):
        assert SumTree([2, 2, 2, 2]).levels() == [[2, 2, 2, 2], [4, 4], [8]]

    def test_padding_to_power_of_two(self):
        tree = SumTree([1, 2, 3])
        assert tree.levels() == [[1, 2, 3, 0], [3, 3], [6]]
        assert tree.leaves == [1, 2, 3]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            SumTree([])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            SumTree([1, -1])

    def test_build_alias(self):
        assert build([1, 1]).total == 2


class TestSelect:
    def test_matches_naive_examples(self):
        tree = SumTree([1, 0, 3, 0])
        assert tree.select(0) == 1
        assert tree.select(3) == 3

    def test_out_of_range(self):
        tree = SumTree([1, 0, 3, 0])
        with pytest.raises(ValueError):
            tree.select(4)
        with pytest.raises(ValueError):
            tree.select(-1)

    def test_exhaustive_vs_naive_m4_w6(self):
        for counts in compositions(4, 6):
            tree = SumTree(counts)
            for z in range(6):
                assert tree.select(z) == select_naive(counts, z)

    @given(st.lists(st.integers(0, 20), min_size=1, max_size=40).filter(lambda c: sum(c) > 0))
    def test_select_vs_naive_property(self, counts):
        tree = SumTree(counts)
        for z in range(0, sum(counts), max(1, sum(counts) // 11)):
            assert tree.select(z) == select_naive(counts, z)


class TestUpdate:
    def test_path_update(self):
        tree = SumTree([1, 0, 3, 0])
        tree.update(3, -1)
        assert tree.levels() == [[1, 0, 2, 0], [1, 2], [3]]

    def test_update_inverse(self):
        tree = SumTree([2, 5, 1, 0, 4])
        before = tree.levels()
        tree.update(2, +1)
        tree.update(2, -1)
        assert tree.levels() == before

    def test_negative_leaf_rejected(self):
        tree = SumTree([1, 0])
        with pytest.raises(ValueError):
            tree.update(2, -1)

    def test_touch_count_m256(self):
        tree = SumTree.balanced(256, 1024)
        tree.count_touches = True
        tree.update(100, +1)
        assert tree.last_touches == 9  # ceil(log2 256) + 1
        tree.update(100, -1)

    def test_counting_mode_matches_kernel(self):
        a = SumTree([3, 1, 4, 1, 5])
        b = SumTree([3, 1, 4, 1, 5])
        b.count_touches = True
        for z in range(14):
            assert a.select(z) == b.select(z)
        for sym, delta in [(1, 1), (5, -1), (3, 1)]:
            a.update(sym, delta)
            b.update(sym, delta)
        assert a.levels() == b.levels()


class TestStep:
    def test_mirrors_core_example(self):
        tree = SumTree([2, 2])
        src = SeededBitSource(0)
        # find a seed draw giving z that evicts symbol 2 deterministically:
        # with counts [2,2], z in {2,3} selects 2
        from isw import TableBitSource

        tree.step(1, TableBitSource([1, 1]))  # z=3
        assert tree.leaves == [3, 1]

    def test_cancellation(self):
        from isw import TableBitSource

        tree = SumTree([2, 2])
        tree.step(1, TableBitSource([0, 0]))  # z=0 evicts 1
        assert tree.leaves == [2, 2]

    def test_replay_matches_naive_state(self):
        m, w, steps = 16, 64, 10_000
        state = IswState(m, w)
        tree = SumTree.balanced(m, w)
        a, b = SeededBitSource(2718), SeededBitSource(2718)
        sym_src = SeededBitSource(31337)
        for _ in range(steps):
            sym = sym_src.take(4) + 1
            state.step(sym, a)
            tree.step(sym, b)
        assert tree.leaves == state.counts
        tree.validate()

    def test_step_touch_bound(self):
        tree = SumTree.balanced(16, 64)
        tree.count_touches = True
        src = SeededBitSource(5)
        limit = 3 * (4 + 1)
        for sym in (1, 7, 16, 3):
            tree.step(sym, src)
            assert tree.last_touches <= limit
        tree.validate()

    def test_isw_step_fast_alias(self):
        from isw import TableBitSource

        tree = SumTree([2, 2])
        assert isw_step_fast(tree, 1, TableBitSource([1, 1])) is tree


class TestStructure:
    @given(
        st.lists(st.integers(0, 9), min_size=2, max_size=17).filter(lambda c: sum(c) > 0),
        st.lists(st.tuples(st.integers(1, 100), st.booleans()), max_size=30),
    )
    @settings(max_examples=60)
    def test_invariants_after_random_ops(self, counts, ops):
        tree = SumTree(counts)
        m = len(counts)
        for raw_sym, grow in ops:
            sym = 1 + (raw_sym - 1) % m
            if grow:
                tree.update(sym, +1)
            elif tree.count(sym) > 0:
                tree.update(sym, -1)
        tree.validate()
        assert tree.total == sum(tree.leaves)

    def test_levels_bounds(self):
        tree = SumTree([1, 2, 3])
        with pytest.raises(ValueError):
            tree.level(0)
        with pytest.raises(ValueError):
            tree.level(4)


class TestCodingWeights:
    def test_partition(self):
        counts = [3, 0, 2, 7, 1]
        tree = SumTree(counts)
        edges = [tree.coding_interval(j) for j in range(1, 6)]
        assert edges[0][0] == 0
        assert edges[-1][1] == tree.coding_total == 2 * sum(counts) + 5
        for (lo, hi), (lo2, _) in zip(edges, edges[1:]):
            assert hi == lo2 and hi - lo >= 1

    def test_find_inverts_interval(self):
        counts = [3, 0, 2, 7, 1]
        tree = SumTree(counts)
        for v in range(tree.coding_total):
            sym, lo, hi = tree.coding_find(v)
            assert lo <= v < hi
            assert (lo, hi) == tree.coding_interval(sym)

    def test_probability_fraction(self):
        tree = SumTree([3, 1])
        assert tree.probability(1) == Fraction(7, 10)

    def test_find_out_of_range(self):
        with pytest.raises(ValueError):
            SumTree([1, 1]).coding_find(6)
