import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_table
from nswr.core import QueryTable, Ranking, SizeMismatchError, induced_queries, score
from nswr.exact import optimal_ranking_subset_dp
from nswr.oracle import CountingOracle, NoiseParams
from nswr.window_dp import (
    IntervalNode,
    admissible_sets,
    band_gains,
    interval_tree,
    merge_halves,
    sort_presorted,
    sort_presorted_reference,
    windowed_sort,
)


def window_optimum(q: QueryTable, initial: Ranking, k: int) -> int:
    """Best score over orders moving no element more than ``k`` positions from ``initial``."""
    n, order = q.n, initial.order
    best = None
    for perm in itertools.permutations(range(n)):
        if all(abs(perm[p] - p) <= k for p in range(n)):
            s = score(q, Ranking.from_order(order[list(perm)]))
            best = s if best is None else max(best, s)
    return best


def random_start(n, seed):
    return Ranking(np.random.default_rng(seed + 999).permutation(n))


def test_zero_window_is_identity():
    _, q = random_table(10, 1)
    start = random_start(10, 1)
    out, s = sort_presorted(q, start, 0)
    assert out == start and s == score(q, start)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_noiseless_input_unchanged(k):
    pi = Ranking(np.random.default_rng(k).permutation(30))
    out, s = sort_presorted(induced_queries(pi), pi, k)
    assert out == pi and s == 435


@pytest.mark.parametrize("k", [1, 2])
def test_matches_constrained_brute_force(k):
    for seed in range(50):
        _, q = random_table(6, seed)
        start = random_start(6, seed)
        out, s = sort_presorted(q, start, k)
        assert s == window_optimum(q, start, k) == score(q, out)
        assert np.abs(out.rank_of - start.rank_of).max() <= k


@pytest.mark.parametrize("n,k", [(5, 1), (7, 1), (6, 2), (8, 2), (9, 3)])
def test_reference_agrees_with_kernel(n, k):
    for seed in range(15):
        _, q = random_table(n, seed)
        start = random_start(n, seed)
        ref, s_ref, root = sort_presorted_reference(q, start, k)
        out, s = sort_presorted(q, start, k)
        assert s == s_ref
        assert len(root.candidate_sets) == 1


@pytest.mark.parametrize("n,k", [(8, 1), (12, 2), (16, 3)])
def test_candidate_sets_bounded(n, k):
    _, q = random_table(n, 3)
    _, _, root = sort_presorted_reference(q, Ranking.identity(n), k)
    stack = [root]
    while stack:
        node = stack.pop()
        assert len(node.candidate_sets) <= 2 ** (4 * k)
        # every candidate set lies between the shrunk and expanded intervals
        for s in node.candidate_sets:
            assert set(node.shrunk(k)) <= s <= set(node.expanded(k, n))
        if node.children:
            stack.extend(node.children)


def test_kernel_stats_bounded():
    _, q = random_table(200, 7)
    res = windowed_sort(q, np.arange(200), 3, with_stats=True)
    assert res.stats.max_candidates <= 2 ** (4 * 3)
    assert res.stats.max_zone_bits <= 12
    assert res.stats.per_node.size == interval_tree(200)[0].size


@given(st.integers(2, 9), st.integers(0, 3), st.integers(0, 10**6))
def test_never_worse_than_input(n, k, seed):
    _, q = random_table(n, seed)
    start = random_start(n, seed)
    res = windowed_sort(q, start.order, k)
    assert res.gain >= 0
    assert score(q, Ranking.from_order(res.items)) == score(q, start) + res.gain


@given(st.integers(3, 9), st.integers(0, 10**6), st.data())
def test_exact_when_optimum_is_in_window(n, seed, data):
    # start from a random window-k perturbation of an optimum
    _, q = random_table(n, seed)
    opt, best = optimal_ranking_subset_dp(q)
    k = data.draw(st.integers(1, 3))
    order = opt.order.copy()
    for a in range(0, n - 1, 2):
        if data.draw(st.booleans()):
            order[a], order[a + 1] = order[a + 1], order[a]
    out, s = sort_presorted(q, Ranking.from_order(order), k)
    assert s == best


@pytest.mark.parametrize("n", [10, 14])
def test_full_window_is_optimal(n):
    for seed in range(5):
        _, q = random_table(n, seed)
        assert sort_presorted(q, random_start(n, seed), n)[1] == optimal_ranking_subset_dp(q)[1]


def test_merge_halves_two_items():
    # positions 0 < 1; the table says position 0 is the larger one
    q = QueryTable([[0, 1], [-1, 0]])
    left, right, node = IntervalNode(0, 0), IntervalNode(1, 1), IntervalNode(0, 1)
    for leaf in (left, right):
        leaf.candidate_sets = {s: ((next(iter(s)),), 0) for s in admissible_sets(leaf, 1, 2)}
    out = merge_halves(q, left, right, node, 1)
    assert out == {frozenset({0, 1}): ((1, 0), 1)}


def test_merge_halves_zero_window_keeps_order():
    q = QueryTable([[0, 1], [-1, 0]])
    left, right, node = IntervalNode(0, 0), IntervalNode(1, 1), IntervalNode(0, 1)
    left.candidate_sets = {frozenset({0}): ((0,), 0)}
    right.candidate_sets = {frozenset({1}): ((1,), 0)}
    assert merge_halves(q, left, right, node, 0) == {frozenset({0, 1}): ((0, 1), -1)}


def test_interval_tree_shape():
    lo, hi, left, right = interval_tree(5)
    assert (lo[0], hi[0]) == (0, 4)
    assert (lo[left[0]], hi[left[0]]) == (0, 2)
    assert (lo[right[0]], hi[right[0]]) == (3, 4)
    leaves = left == -1
    assert np.array_equal(lo[leaves], hi[leaves])
    assert sorted(lo[leaves].tolist()) == list(range(5))


def test_band_gains_queries_only_the_band():
    o = CountingOracle(Ranking.identity(50), NoiseParams(0.25, 1))
    g = band_gains(o, np.arange(50), 2)
    assert g.shape == (50, 5)
    assert o.distinct_queries == sum(50 - d for d in range(1, 5))


def test_query_count_grows_linearly():
    counts = []
    for n in (64, 128, 256, 512):
        o = CountingOracle(Ranking.identity(n), NoiseParams(0.25, n))
        windowed_sort(o, np.arange(n), 2)
        counts.append(o.distinct_queries)
    slopes = np.diff(np.log2(counts))
    assert np.all(np.abs(slopes - 1) < 0.05)


def test_zone_guard():
    _, q = random_table(80, 0)
    with pytest.raises(ValueError, match="zone"):
        windowed_sort(q, np.arange(80), 16)
    with pytest.raises(ValueError):
        windowed_sort(q, np.arange(80), -1)


def test_size_mismatch():
    _, q = random_table(5, 0)
    with pytest.raises(SizeMismatchError):
        sort_presorted(q, Ranking.identity(4), 1)
    with pytest.raises(SizeMismatchError):
        sort_presorted_reference(q, Ranking.identity(4), 1)


@pytest.mark.parametrize("m,k", [(12, 1), (20, 2), (14, 3)])
def test_fallback_matches_numba(m, k, monkeypatch):
    _, q = random_table(m, m + k)
    start = random_start(m, k).order
    fast = windowed_sort(q, start, k)
    monkeypatch.setenv("NSWR_DISABLE_NUMBA", "1")
    slow = windowed_sort(q, start, k)
    assert fast.gain == slow.gain
    assert np.array_equal(fast.items, slow.items)
