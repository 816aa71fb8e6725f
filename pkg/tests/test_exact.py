import itertools

import numpy as np
import pytest

from conftest import random_table
from nswr import _kernels
from nswr.core import QueryTable, Ranking, induced_queries, score
from nswr.exact import (
    EXHAUSTIVE_MAX_N,
    SUBSET_DP_MAX_N,
    SolverGuardError,
    optimal_ranking_exhaustive,
    optimal_ranking_subset_dp,
)

SOLVERS = [optimal_ranking_exhaustive, optimal_ranking_subset_dp]


def brute_force(q: QueryTable) -> int:
    return max(score(q, Ranking(p)) for p in itertools.permutations(range(q.n)))


@pytest.fixture(params=["numba", "fallback"])
def backend(request, monkeypatch):
    if request.param == "fallback":
        monkeypatch.setenv("NSWR_DISABLE_NUMBA", "1")
    return request.param


@pytest.mark.parametrize("solver", SOLVERS)
@pytest.mark.parametrize("n", range(0, 7))
def test_noiseless_recovers_truth(solver, n, backend):
    pi = Ranking(np.random.default_rng(n).permutation(n))
    ranking, s = solver(induced_queries(pi))
    assert ranking == pi
    assert s == n * (n - 1) // 2


@pytest.mark.parametrize("solver", SOLVERS)
def test_three_cycle(solver, backend):
    # 0 > 1 > 2 > 0: every ranking with one upset scores 1
    q = QueryTable([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])
    ranking, s = solver(q)
    assert s == 1
    assert score(q, ranking) == 1


def test_exhaustive_tie_break_is_lexicographic():
    q = QueryTable([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])
    optima = sorted(p for p in itertools.permutations(range(3)) if score(q, Ranking(p)) == 1)
    assert optimal_ranking_exhaustive(q)[0] == Ranking(optima[0])


@pytest.mark.parametrize("n", range(2, 8))
def test_solvers_match_brute_force(n, backend):
    for seed in range(10):
        _, q = random_table(n, seed)
        best = brute_force(q)
        for solver in SOLVERS:
            ranking, s = solver(q)
            assert s == best == score(q, ranking)


@pytest.mark.parametrize("n", [9, 12])
def test_backends_agree(n):
    for seed in range(3):
        _, q = random_table(n, seed)
        Q = np.ascontiguousarray(q.matrix)
        assert _kernels.subset_dp_kernel(Q)[1] == _kernels.subset_dp_numpy(Q)[1]
        if n <= 9:
            fast, slow = _kernels.exhaustive_kernel(Q), _kernels.exhaustive_numpy(Q)
            assert fast[1] == slow[1]
            assert np.array_equal(fast[0], slow[0])


@pytest.mark.parametrize("n", range(2, 13))
def test_no_adjacent_swap_improves(n):
    # a certificate of local optimality for the returned ranking
    _, q = random_table(n, 100 + n)
    ranking, s = optimal_ranking_subset_dp(q)
    order = ranking.order
    for a in range(n - 1):
        swapped = order.copy()
        swapped[a], swapped[a + 1] = swapped[a + 1], swapped[a]
        assert score(q, Ranking.from_order(swapped)) <= s


@pytest.mark.parametrize("n", range(2, 9))
def test_negated_table_reverses_optimum(n):
    _, q = random_table(n, n)
    ranking, s = optimal_ranking_subset_dp(q)
    assert optimal_ranking_subset_dp(q.negated())[1] == s
    assert score(q.negated(), ranking.reversed()) == s


def test_noiseless_sixteen():
    pi = Ranking(np.random.default_rng(16).permutation(16))
    ranking, s = optimal_ranking_subset_dp(induced_queries(pi))
    assert ranking == pi and s == 120


def test_guards():
    with pytest.raises(SolverGuardError):
        optimal_ranking_exhaustive(induced_queries(Ranking.identity(EXHAUSTIVE_MAX_N + 1)))
    with pytest.raises(SolverGuardError):
        optimal_ranking_subset_dp(induced_queries(Ranking.identity(SUBSET_DP_MAX_N + 1)))


@pytest.mark.parametrize("solver", SOLVERS)
def test_trivial_sizes(solver):
    for n in (0, 1):
        ranking, s = solver(induced_queries(Ranking.identity(n)))
        assert ranking.n == n and s == 0
