"""Optimal re-sorting of a presorted list by interval-split dynamic programming.

If some optimal ranking moves every element at most ``k`` places away from
its position in the input order, :func:`sort_presorted` finds an optimum.
The search ranges over exactly the window-``k`` rearrangements of the input,
so the returned score is never below the input's.

Two implementations are provided: the flat-array kernel in ``_kernels``,
used everywhere, and :func:`sort_presorted_reference`, a direct rendering
built from :func:`merge_halves` over explicit element sets. The reference
is only practical for small inputs and is used as a cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from . import _accel, _kernels
from .core import QueryTable, Ranking, SizeMismatchError, score

__all__ = [
    "DPStats",
    "IntervalNode",
    "WindowResult",
    "admissible_sets",
    "band_gains",
    "interval_tree",
    "merge_halves",
    "sort_presorted",
    "sort_presorted_reference",
    "windowed_sort",
]

MAX_ZONE_BITS = 62


@dataclass(frozen=True)
class DPStats:
    candidates_total: int
    max_candidates: int
    split_evaluations: int
    max_zone_bits: int
    per_node: npt.NDArray[np.int64] = field(repr=False)


@dataclass(frozen=True)
class WindowResult:
    items: npt.NDArray[np.int64]
    gain: int
    stats: DPStats | None


@lru_cache(maxsize=512)
def interval_tree(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Preorder arrays ``(lo, hi, left, right)`` of the halving tree over ``[0, m)``.

    The left half of ``[lo, hi]`` is ``ceil(len / 2)`` long; leaves are single
    positions and have ``left == right == -1``.
    """
    lo, hi, left, right = [], [], [], []
    stack = [(0, m - 1, -1, 0)]
    while stack:
        a, b, parent, side = stack.pop()
        v = len(lo)
        lo.append(a)
        hi.append(b)
        left.append(-1)
        right.append(-1)
        if parent >= 0:
            (left if side == 0 else right)[parent] = v
        if b > a:
            mid = a + (b - a + 2) // 2 - 1
            # push right first so the left subtree is emitted next (preorder)
            stack.append((mid + 1, b, v, 1))
            stack.append((a, mid, v, 0))
    out = tuple(np.array(x, dtype=np.int64) for x in (lo, hi, left, right))
    for arr in out:
        arr.setflags(write=False)
    return out


def band_gains(source, items: npt.ArrayLike, k: int) -> npt.NDArray[np.int64]:
    """``gains[a, d]``: score change when the items at positions ``a`` and ``a + d`` swap order.

    Only offsets ``d <= 2k`` are queried; a window-``k`` rearrangement cannot
    invert a pair that starts further apart.
    """
    items = np.asarray(items, dtype=np.int64)
    m = items.size
    band = max(0, min(2 * k, m - 1))
    gains = np.zeros((m, band + 1), dtype=np.int64)
    for d in range(1, band + 1):
        a = np.arange(m - d)
        gains[a, d] = -2 * source.compare_many(items[a + d], items[a]).astype(np.int64)
    return gains


def _zone_bits(m: int, k: int) -> int:
    return min(m, 4 * k)


def windowed_sort(source, items: npt.ArrayLike, k: int, *, with_stats: bool = False) -> WindowResult:
    """Best window-``k`` rearrangement of ``items`` (listed smallest first).

    ``source`` is anything with ``compare_many`` (a ``QueryTable`` or a
    ``CountingOracle``); ``gain`` is the score improvement over ``items``.
    """
    items = np.asarray(items, dtype=np.int64)
    m = items.size
    if k < 0:
        raise ValueError("window must be non-negative")
    if m <= 1 or k == 0:
        return WindowResult(items.copy(), 0, None)
    k = min(k, m)
    if _zone_bits(m, k) > MAX_ZONE_BITS:
        raise ValueError(f"window {k} too large for {m} items (zone exceeds {MAX_ZONE_BITS} bits)")
    gains = band_gains(source, items, k)
    lo, hi, left, right = interval_tree(m)
    kernel = _kernels.window_dp_kernel
    if not _accel.numba_enabled():
        kernel = kernel.py_func
    pos, gain, st, per_node = kernel(lo, hi, left, right, gains, k, _kernels.BINOM)
    stats = None
    if with_stats:
        stats = DPStats(int(st[0]), int(st[1]), int(st[2]), int(st[3]), per_node.copy())
    return WindowResult(items[pos], int(gain), stats)


def sort_presorted(q, initial: Ranking, k: int) -> tuple[Ranking, int]:
    """Re-sort ``initial`` optimally within per-element window ``k``.

    Returns the new ranking and its score. Against a ``CountingOracle`` the
    score is taken from the uncounted audit table.
    """
    if q.n != initial.n:
        raise SizeMismatchError(f"size mismatch: {q.n} != {initial.n}")
    res = windowed_sort(q, initial.order, k)
    out = Ranking.from_order(res.items)
    table = q if isinstance(q, QueryTable) else q.audit_table()
    return out, score(table, out)


# --------------------------------------------------------------------------
# explicit-set reference


@dataclass
class IntervalNode:
    """Output positions ``[lo, hi]`` and the best ordering of each admissible element set."""

    lo: int
    hi: int
    children: tuple[IntervalNode, IntervalNode] | None = None
    candidate_sets: dict[frozenset, tuple[tuple[int, ...], int]] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1

    def shrunk(self, k: int) -> range:
        return range(self.lo + k, self.hi - k + 1)

    def expanded(self, k: int, m: int) -> range:
        return range(max(0, self.lo - k), min(m - 1, self.hi + k) + 1)

    def admits(self, s: frozenset, k: int, m: int) -> bool:
        core = set(self.shrunk(k))
        plus = set(self.expanded(k, m))
        return len(s) == self.length and core <= s <= plus


def admissible_sets(node: IntervalNode, k: int, m: int) -> list[frozenset]:
    core = frozenset(node.shrunk(k))
    zone = [p for p in node.expanded(k, m) if p not in core]
    need = node.length - len(core)
    if need < 0:
        return []
    sets = [core | frozenset(c) for c in itertools.combinations(zone, need)]
    assert len(sets) <= 2 ** min(len(zone), 4 * k)
    return sets


def merge_halves(q: QueryTable, left: IntervalNode, right: IntervalNode, node: IntervalNode, k: int):
    """Fill ``node.candidate_sets`` from its solved halves.

    ``q`` is indexed by position. For each admissible set the best split
    scores left + right + the cross terms ``q(r, l)`` with the right half on top.
    """
    m = q.n
    M = q.matrix
    out: dict[frozenset, tuple[tuple[int, ...], int]] = {}
    for s in admissible_sets(node, k, m):
        best = None
        for lset, (lord, lscore) in left.candidate_sets.items():
            if not lset <= s:
                continue
            rset = s - lset
            hit = right.candidate_sets.get(rset)
            if hit is None:
                continue
            rord, rscore = hit
            cross = int(M[np.ix_(list(rord), list(lord))].sum(dtype=np.int64))
            total = lscore + rscore + cross
            if best is None or total > best[1]:
                best = (lord + rord, total)
        if best is not None:
            assert node.admits(s, k, m)
            out[s] = best
    node.candidate_sets = out
    return out


def _build_reference(lo: int, hi: int) -> IntervalNode:
    node = IntervalNode(lo, hi)
    if hi > lo:
        mid = lo + (hi - lo + 2) // 2 - 1
        node.children = (_build_reference(lo, mid), _build_reference(mid + 1, hi))
    return node


def _solve_reference(q: QueryTable, node: IntervalNode, k: int) -> None:
    if node.children is None:
        node.candidate_sets = {s: ((next(iter(s)),), 0) for s in admissible_sets(node, k, q.n)}
        return
    left, right = node.children
    _solve_reference(q, left, k)
    _solve_reference(q, right, k)
    merge_halves(q, left, right, node, k)


def sort_presorted_reference(q: QueryTable, initial: Ranking, k: int) -> tuple[Ranking, int, IntervalNode]:
    """Explicit-set version of :func:`sort_presorted`; also returns the solved tree."""
    if q.n != initial.n:
        raise SizeMismatchError(f"size mismatch: {q.n} != {initial.n}")
    n = q.n
    order = initial.order
    if n == 0:
        return initial, 0, IntervalNode(0, -1)
    qpos = QueryTable(q.matrix[np.ix_(order, order)])
    root = _build_reference(0, n - 1)
    _solve_reference(qpos, root, max(k, 0))
    (pos_order, _), = root.candidate_sets.values()
    out = Ranking.from_order(order[list(pos_order)])
    return out, score(q, out), root
