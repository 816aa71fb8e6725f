"""Rankings, complete comparison tables, the score functional and distances.

Conventions: items are ``0..n-1``; ``Ranking.rank_of[i]`` is the 0-based rank
of item ``i`` with larger rank meaning larger element. ``QueryTable.matrix[i, j]``
is ``q(a_i, a_j)``: ``+1`` when the comparison says ``a_i`` is the larger one.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

__all__ = [
    "Ranking",
    "QueryTable",
    "SizeMismatchError",
    "score",
    "dislocation_distance",
    "disagreement_distance",
    "inversion_count",
    "induced_queries",
    "max_score",
]


class SizeMismatchError(ValueError):
    """Two objects that must describe the same item universe do not."""


def _check_same_n(a: int, b: int) -> None:
    if a != b:
        raise SizeMismatchError(f"size mismatch: {a} != {b}")


class Ranking:
    """An immutable permutation of ``n`` items."""

    __slots__ = ("_rank_of", "_order")

    def __init__(self, rank_of: Sequence[int] | npt.ArrayLike) -> None:
        arr = np.array(rank_of, dtype=np.int64).reshape(-1)
        n = arr.size
        order = np.full(n, -1, dtype=np.int64)
        if n and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("rank_of must be a bijection on {0..n-1}")
        order[arr] = np.arange(n, dtype=np.int64)
        if (order < 0).any():
            raise ValueError("rank_of must be a bijection on {0..n-1}")
        arr.setflags(write=False)
        order.setflags(write=False)
        self._rank_of = arr
        self._order = order

    @classmethod
    def from_order(cls, order: Sequence[int] | npt.ArrayLike) -> Ranking:
        """Build from the items listed from smallest to largest."""
        order = np.asarray(order, dtype=np.int64).reshape(-1)
        rank_of = np.empty_like(order)
        rank_of[order] = np.arange(order.size, dtype=np.int64)
        return cls(rank_of)

    @classmethod
    def identity(cls, n: int) -> Ranking:
        return cls(np.arange(n))

    @property
    def n(self) -> int:
        return int(self._rank_of.size)

    @property
    def rank_of(self) -> npt.NDArray[np.int64]:
        return self._rank_of

    @property
    def order(self) -> npt.NDArray[np.int64]:
        """Items sorted by increasing rank (the inverse permutation)."""
        return self._order

    def reversed(self) -> Ranking:
        return Ranking(self.n - 1 - self._rank_of)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ranking):
            return NotImplemented
        return np.array_equal(self._rank_of, other._rank_of)

    def __hash__(self) -> int:
        return hash(self._rank_of.tobytes())

    def __repr__(self) -> str:
        return f"Ranking({self._rank_of.tolist()})"


class QueryTable:
    """A complete antisymmetric table of ``+1/-1`` comparison outcomes."""

    __slots__ = ("_matrix", "labels")

    def __init__(self, matrix: npt.ArrayLike, labels: Sequence[str] | None = None) -> None:
        m = np.array(matrix, dtype=np.int8)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("query matrix must be square")
        n = m.shape[0]
        if np.any(np.diagonal(m) != 0):
            raise ValueError("self-comparisons are not allowed (diagonal must be 0)")
        off = ~np.eye(n, dtype=bool)
        if np.any(np.abs(m[off]) != 1):
            raise ValueError("every off-diagonal entry must be +1 or -1 (table incomplete)")
        if not np.array_equal(m, -m.T):
            raise ValueError("query table violates antisymmetry q(i,j) = -q(j,i)")
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise ValueError("labels must name every item exactly once")
        m.setflags(write=False)
        self._matrix = m
        self.labels = labels

    @classmethod
    def from_upper(cls, n: int, upper: npt.ArrayLike, labels: Sequence[str] | None = None) -> QueryTable:
        """Build from ``q(a_i, a_j)`` for ``i < j`` in ``np.triu_indices(n, 1)`` order."""
        m = np.zeros((n, n), dtype=np.int8)
        iu = np.triu_indices(n, 1)
        m[iu] = np.asarray(upper, dtype=np.int8)
        m[(iu[1], iu[0])] = -m[iu]
        return cls(m, labels)

    @property
    def n(self) -> int:
        return int(self._matrix.shape[0])

    @property
    def matrix(self) -> npt.NDArray[np.int8]:
        return self._matrix

    def q(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("self-comparison")
        return int(self._matrix[i, j])

    def compare_many(self, i: npt.ArrayLike, j: npt.ArrayLike) -> npt.NDArray[np.int8]:
        """Vectorised ``q(a_i, a_j)``; same call shape as ``CountingOracle``."""
        return self._matrix[np.asarray(i, dtype=np.int64), np.asarray(j, dtype=np.int64)]

    def negated(self) -> QueryTable:
        return QueryTable(-self._matrix.astype(np.int16), self.labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QueryTable):
            return NotImplemented
        return np.array_equal(self._matrix, other._matrix)

    def __repr__(self) -> str:
        return f"QueryTable(n={self.n})"


def max_score(n: int) -> int:
    return n * (n - 1) // 2


def score(q: QueryTable, sigma: Ranking) -> int:
    """Sum over unordered pairs of ``q(higher-ranked item, lower-ranked item)``.

    Equals agreements minus upsets, so ``n(n-1)/2`` is attained exactly when
    ``sigma`` has no upsets against ``q``.
    """
    _check_same_n(q.n, sigma.n)
    order = sigma.order
    sub = q.matrix[np.ix_(order, order)]
    # row index = higher rank, column = lower rank
    return int(np.tril(sub, -1).sum(dtype=np.int64))


def dislocation_distance(sigma: Ranking, tau: Ranking) -> int:
    _check_same_n(sigma.n, tau.n)
    return int(np.abs(sigma.rank_of - tau.rank_of).sum())


def disagreement_distance(q: QueryTable, q2: QueryTable) -> int:
    """Number of unordered pairs on which the two tables differ."""
    _check_same_n(q.n, q2.n)
    return int(np.count_nonzero(np.triu(q.matrix != q2.matrix, 1)))


def induced_queries(pi: Ranking) -> QueryTable:
    """The noiseless table of ``pi``: ``q(a_i, a_j) = +1`` iff ``pi(i) > pi(j)``."""
    r = pi.rank_of
    m = np.sign(r[:, None] - r[None, :]).astype(np.int8)
    return QueryTable(m)


def inversion_count(tau: Ranking) -> int:
    """Pairs ordered differently by ``tau`` and the identity (O(n log n))."""
    r = tau.rank_of
    n = r.size
    tree = np.zeros(n + 1, dtype=np.int64)
    inv = 0
    for seen, v in enumerate(r.tolist()):
        # count earlier ranks greater than v
        i, le = v + 1, 0
        while i > 0:
            le += tree[i]
            i -= i & -i
        inv += seen - le
        i = v + 1
        while i <= n:
            tree[i] += 1
            i += i & -i
    return int(inv)
