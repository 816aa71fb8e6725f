"""End-to-end solvers: random insertion chain + windowed re-sort.

:func:`noisy_sort_insertion` inserts each element by block majorities over
the whole working order. :func:`noisy_sort_query_efficient` replaces that
with the tree walk, so each insertion spends O(log n) comparisons.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
import numpy.typing as npt

from .core import QueryTable, Ranking, score
from .treewalk import build_walk_tree, insert_tree_walk, partition_bounds
from .window_dp import windowed_sort

__all__ = [
    "NswrParams",
    "InsertionResult",
    "QueryEfficientResult",
    "insert_coarse",
    "polish",
    "noisy_sort_insertion",
    "noisy_sort_query_efficient",
]

RESORT_MODES = ("full", "local")


@dataclass(frozen=True)
class NswrParams:
    """Tunable stand-ins for the asymptotic constants.

    ``window`` is the re-sort dislocation bound, ``block_len`` the coarse
    insertion block, ``majority_k`` the size of each tree-walk majority test,
    ``walk_steps`` the walk length (also the leaf-chain length), and
    ``interval_len_min/max`` and ``trim`` shape the walk's partition.
    ``resort="local"`` re-sorts only ``local_radius`` (default ``4 * window``)
    positions either side of the insertion point. Whenever the working order
    doubles in size, and once at the end, :func:`polish` runs with
    ``polish_radius`` and ``polish_window`` for at most ``polish_sweeps``
    sweeps; ``polish_sweeps=0`` disables it. ``span_pad`` widens the
    tree-walk refinement span by that many intervals on each side.
    """

    window: int = 3
    block_len: int = 2
    majority_k: int = 9
    walk_steps: int = 40
    interval_len_min: int = 8
    interval_len_max: int = 16
    trim: int = 2
    beta: float = 1.0
    seed: int = 0
    resort: str = "full"
    local_radius: int | None = None
    polish_radius: int = 64
    polish_sweeps: int = 50
    polish_window: int = 2
    span_pad: int = 1

    def __post_init__(self) -> None:
        for name in ("window", "block_len", "majority_k", "walk_steps", "interval_len_min", "interval_len_max", "trim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not self.interval_len_min <= self.interval_len_max <= 2 * self.interval_len_min:
            raise ValueError("need interval_len_min <= interval_len_max <= 2 * interval_len_min")
        if 2 * self.trim >= self.interval_len_min:
            raise ValueError("need 2 * trim < interval_len_min")
        if self.resort not in RESORT_MODES:
            raise ValueError(f"resort must be one of {RESORT_MODES}")
        if self.local_radius is not None and self.local_radius < 1:
            raise ValueError("local_radius must be positive")
        if min(self.polish_radius, self.polish_sweeps, self.polish_window, self.span_pad) < 0:
            raise ValueError("polish_radius, polish_sweeps, polish_window and span_pad must be non-negative")

    @property
    def radius(self) -> int:
        return self.local_radius if self.local_radius is not None else 4 * self.window

    @classmethod
    def calibrated(cls, n: int, gamma: float = 0.25, **overrides) -> NswrParams:
        """Desk-scale defaults.

        Up to 12 items the window covers the whole list, which is what the
        asymptotic window would do at that size. Above 64 items re-sorting is
        localised. The walk gets ``4 * depth + 12`` steps for the ``n``-item tree.
        """
        window = n if n <= 12 else 3
        depth = max(1, math.ceil(math.log2(max(2, n / 8))))
        majority_k = 9 if gamma >= 0.2 else 2 * math.ceil(1.5 / gamma**2) + 1
        base = dict(
            window=max(1, window),
            block_len=1,
            majority_k=majority_k,
            walk_steps=4 * depth + 12,
            resort="full" if n <= 64 else "local",
        )
        base.update(overrides)
        return cls(**base)

    def as_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **kw) -> NswrParams:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


class InsertionResult(NamedTuple):
    ranking: Ranking
    score: int
    events: tuple[str, ...]


class QueryEfficientResult(NamedTuple):
    ranking: Ranking
    score: int
    query_stats: tuple[int, int]
    events: tuple[str, ...]


def insert_coarse(current: npt.ArrayLike, x: int, oracle, block_len: int) -> int:
    """Insertion index for ``x`` from block-majority comparisons.

    Every element is compared with ``x``; each block of ``block_len``
    consecutive elements reports "x larger" on a strict majority. The
    returned block boundary minimises the number of contradicting blocks,
    preferring the later boundary on ties. With monotone reports this is
    the boundary after the last "larger" block.
    """
    current = np.asarray(current, dtype=np.int64)
    m = current.size
    if m == 0:
        return 0
    out = oracle.compare_many(np.full(m, x, dtype=np.int64), current)
    starts = np.arange(0, m, block_len)
    wins = np.add.reduceat((out > 0).astype(np.int64), starts)
    sizes = np.diff(np.append(starts, m))
    larger = 2 * wins > sizes
    # cost(b) = smaller-reports among blocks < b + larger-reports among blocks >= b
    smaller_before = np.concatenate(([0], np.cumsum(~larger)))
    larger_from = np.concatenate((np.cumsum(larger[::-1])[::-1], [0]))
    cost = smaller_before + larger_from
    b = int(np.flatnonzero(cost == cost.min())[-1])
    return int(min(b * block_len, m))


def _reinsert_sweep(source, items: npt.NDArray[np.int64], radius: int) -> int:
    """Move each element to its best slot within ``radius`` places, in place."""
    m = items.size
    pos = np.empty(int(items.max()) + 1, dtype=np.int64)
    pos[items] = np.arange(m)
    total = 0
    for x in items.copy().tolist():
        i = int(pos[x])
        lo, hi = max(0, i - radius), min(m, i + radius + 1)
        rest = np.delete(items[lo:hi], i - lo)
        if rest.size == 0:
            continue
        row = source.compare_many(np.full(rest.size, x, dtype=np.int64), rest).astype(np.int64)
        # value of slot s: x beats rest[:s], loses to rest[s:]
        val = 2 * np.concatenate(([0], np.cumsum(row))) - row.sum()
        s = int(np.argmax(val))
        g = int(val[s] - val[i - lo])
        if g > 0:
            total += g
            items[lo:hi] = np.insert(rest, s, x)
            pos[items[lo:hi]] = np.arange(lo, hi)
    return total


def polish(source, items: npt.ArrayLike, window: int, radius: int, max_sweeps: int) -> tuple[npt.NDArray[np.int64], int]:
    """Alternate single-element moves within ``radius`` and a full window-``window`` pass.

    Stops at the first sweep with no improvement. Returns the new order and
    the total score gain. Only pairs within ``max(radius, 2 * window)``
    positions are compared, so a sweep costs O(m * radius) comparisons.
    """
    items = np.array(items, dtype=np.int64)
    total = 0
    if items.size <= 1:
        return items, 0
    for _ in range(max_sweeps):
        g = _reinsert_sweep(source, items, radius) if radius else 0
        res = windowed_sort(source, items, window)
        items = res.items
        g += res.gain
        total += g
        if g <= 0:
            break
    return items, total


def _table_of(source) -> QueryTable:
    return source if isinstance(source, QueryTable) else source.audit_table()


class _Chain:
    """Working order plus the bookkeeping shared by both solvers."""

    def __init__(self, source, params: NswrParams, truth: Ranking | None, on_step) -> None:
        self.source = source
        self.params = params
        self.truth = truth
        self.on_step = on_step
        self.items = np.zeros(0, dtype=np.int64)
        self.violations = 0
        self.negative_gains = 0
        self.step = 0
        self.next_polish = 2

    def insert_and_resort(self, x: int, pos: int) -> None:
        p = self.params
        items = np.insert(self.items, pos, x)
        before = items.copy()
        if p.resort == "full":
            lo, hi = 0, items.size
        else:
            lo, hi = max(0, pos - p.radius), min(items.size, pos + p.radius + 1)
        res = windowed_sort(self.source, items[lo:hi], p.window)
        items[lo:hi] = res.items
        if res.gain < 0:
            self.negative_gains += 1
        if items.size >= self.next_polish:
            items = self.polish(items)
            self.next_polish = 2 * items.size
        self.items = items
        if self.truth is not None:
            true_rank = self.truth.rank_of[items]
            rel = np.empty(items.size, dtype=np.int64)
            rel[np.argsort(true_rank, kind="stable")] = np.arange(items.size)
            if np.abs(rel - np.arange(items.size)).max() > p.window:
                self.violations += 1
        if self.on_step is not None:
            self.on_step(self.step, x, before, items.copy(), res.gain)
        self.step += 1

    def polish(self, items):
        p = self.params
        if p.polish_sweeps == 0:
            return items
        window = min(p.polish_window, p.window)
        return polish(self.source, items, window, p.polish_radius, p.polish_sweeps)[0]

    def finish(self) -> Ranking:
        if self.items.size > 1:
            self.items = self.polish(self.items)
        return Ranking.from_order(self.items)

    def events(self) -> list[str]:
        ev = []
        if self.violations:
            ev.append(f"window_violations={self.violations}")
        if self.negative_gains:
            ev.append(f"negative_gains={self.negative_gains}")
        return ev


def _truth_of(source, truth):
    if truth is not None:
        return truth
    return getattr(source, "truth", None)


def noisy_sort_insertion(
    source,
    params: NswrParams,
    *,
    truth: Ranking | None = None,
    on_step: Callable | None = None,
) -> InsertionResult:
    """Insert items along a seeded random chain, re-sorting after every insertion.

    ``source`` is a ``QueryTable`` or a ``CountingOracle``. Intermediate
    orders farther than ``params.window`` from the truth (when known) are
    counted in the ``window_violations`` event.
    """
    n = source.n
    rng = np.random.default_rng(params.seed)
    chain_order = rng.permutation(n)
    ch = _Chain(source, params, _truth_of(source, truth), on_step)
    for x in chain_order.tolist():
        pos = insert_coarse(ch.items, x, source, params.block_len)
        ch.insert_and_resort(x, pos)
    ranking = ch.finish()
    return InsertionResult(ranking, score(_table_of(source), ranking), tuple(ch.events()))


def noisy_sort_query_efficient(
    oracle,
    params: NswrParams,
    *,
    truth: Ranking | None = None,
    on_step: Callable | None = None,
) -> QueryEfficientResult:
    """Insertion chain with tree-walk placement; O(n log n) distinct comparisons.

    The walk pins ``x`` to two adjacent intervals, then block majorities inside
    those intervals pick the exact slot. Query statistics are read before
    the final (uncounted) scoring.
    """
    n = oracle.n
    rng = np.random.default_rng(params.seed)
    chain_order = rng.permutation(n)
    ch = _Chain(oracle, params, _truth_of(oracle, truth), on_step)
    reused = 0
    for x in chain_order.tolist():
        m = ch.items.size
        if m == 0:
            ch.insert_and_resort(x, 0)
            continue
        bounds = partition_bounds(m, params.interval_len_min, params.interval_len_max)
        t = len(bounds)
        intervals = [ch.items[a:b] for a, b in bounds]
        tree = build_walk_tree(t, params.walk_steps)
        walk = insert_tree_walk(intervals, x, oracle, params, rng=rng, tree=tree)
        reused += walk.reused
        s1, s2 = walk.label
        # the walk can settle one interval off when x sits near a shared edge
        span_lo = bounds[max(s1 - 1 - params.span_pad, 0)][0]
        span_hi = bounds[min(s2 + params.span_pad, t) - 1][1]
        pos = span_lo + insert_coarse(ch.items[span_lo:span_hi], x, oracle, params.block_len)
        ch.insert_and_resort(x, pos)
    ranking = ch.finish()
    stats = (oracle.distinct_queries, oracle.total_accesses)
    events = ch.events()
    if reused:
        events.append(f"walk_reuse={reused}")
    return QueryEfficientResult(ranking, score(_table_of(oracle), ranking), stats, tuple(events))
