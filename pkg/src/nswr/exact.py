"""Exact optimal rankings for small tournaments (test oracles)."""

from __future__ import annotations

import numpy as np

from . import _accel, _kernels
from .core import QueryTable, Ranking

__all__ = [
    "EXHAUSTIVE_MAX_N",
    "SUBSET_DP_MAX_N",
    "SolverGuardError",
    "optimal_ranking_exhaustive",
    "optimal_ranking_subset_dp",
]

EXHAUSTIVE_MAX_N = 10
SUBSET_DP_MAX_N = 20


class SolverGuardError(ValueError):
    """The instance is too large for the requested exact solver."""


def optimal_ranking_exhaustive(q: QueryTable) -> tuple[Ranking, int]:
    """Enumerate all ``n!`` rankings; the lexicographically smallest ``rank_of`` among maximizers wins."""
    n = q.n
    if n > EXHAUSTIVE_MAX_N:
        raise SolverGuardError(f"exhaustive search limited to n <= {EXHAUSTIVE_MAX_N}, got {n}")
    if n <= 1:
        return Ranking.identity(n), 0
    Q = np.ascontiguousarray(q.matrix)
    if _accel.numba_enabled():
        rank_of, best = _kernels.exhaustive_kernel(Q)
    else:
        rank_of, best = _kernels.exhaustive_numpy(Q)
    return Ranking(rank_of), int(best)


def optimal_ranking_subset_dp(q: QueryTable) -> tuple[Ranking, int]:
    """Subset dynamic program over "lowest |S| elements" sets.

    ``best(S + x) = max_x best(S) + sum_{y in S} q(x, y)`` with ``x`` placed on
    top of ``S``; ties go to the smaller item index. Memory is ``2^n`` states.
    """
    n = q.n
    if n > SUBSET_DP_MAX_N:
        raise SolverGuardError(f"subset DP limited to n <= {SUBSET_DP_MAX_N}, got {n}")
    if n <= 1:
        return Ranking.identity(n), 0
    Q = np.ascontiguousarray(q.matrix)
    if _accel.numba_enabled():
        rank_of, best = _kernels.subset_dp_kernel(Q)
    else:
        rank_of, best = _kernels.subset_dp_numpy(Q)
    return Ranking(rank_of), int(best)
