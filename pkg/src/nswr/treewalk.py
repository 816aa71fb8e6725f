"""Backtracking random walk that pins an element to two adjacent intervals.

The working order is cut into consecutive intervals ``I_1..I_t``. A search
tree over ``[1, t]`` has children overlapping at the median, and every
``[s, s+1]`` node heads a chain of copies. Each step runs k-element majority
tests: boundary tests against the trimmed neighbours ``I'_{s1-1}`` and
``I'_{s2+1}`` (backtrack on failure), then a median test that picks a child.
``I_0`` and ``I_{t+1}`` are virtual sentinels that always pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

__all__ = [
    "WalkNode",
    "WalkTree",
    "WalkOutcome",
    "build_walk_tree",
    "partition_bounds",
    "insert_tree_walk",
]


@dataclass(frozen=True)
class WalkNode:
    label: tuple[int, int]
    parent: int
    children: tuple[int, ...]
    chain: bool

    @property
    def is_leaf_label(self) -> bool:
        return self.label[1] - self.label[0] <= 1


@dataclass(frozen=True)
class WalkTree:
    t: int
    nodes: tuple[WalkNode, ...]

    @property
    def root(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.nodes)


@lru_cache(maxsize=256)
def build_walk_tree(t: int, leaf_chain_len: int) -> WalkTree:
    """Tree on ``[1, t]``; ``t == 1`` degenerates to a root labelled ``[1, 2]``."""
    if t < 1:
        raise ValueError("need at least one interval")
    if leaf_chain_len < 0:
        raise ValueError("chain length must be non-negative")
    labels: list[tuple[int, int]] = []
    parents: list[int] = []
    children: list[list[int]] = []
    chain: list[bool] = []

    def add(label, parent, is_chain):
        labels.append(label)
        parents.append(parent)
        children.append([])
        chain.append(is_chain)
        v = len(labels) - 1
        if parent >= 0:
            children[parent].append(v)
        return v

    stack = [((1, max(t, 2)), -1)]
    while stack:
        (s1, s2), parent = stack.pop()
        if s2 - s1 > 1:
            v = add((s1, s2), parent, False)
            mid = (s1 + s2) // 2
            stack.append(((mid, s2), v))
            stack.append(((s1, mid), v))
        else:
            v = add((s1, s2), parent, True)
            for _ in range(leaf_chain_len):
                v = add((s1, s2), v, True)
    # children are appended in creation order; left subtree is created first
    nodes = tuple(WalkNode(labels[i], parents[i], tuple(children[i]), chain[i]) for i in range(len(labels)))
    return WalkTree(t, nodes)


def partition_bounds(m: int, len_min: int, len_max: int) -> list[tuple[int, int]]:
    """Cut ``[0, m)`` into ``ceil(m / len_max)`` near-equal consecutive intervals.

    Falls back to ``floor(m / len_min)`` parts when that would leave an
    interval shorter than ``len_min``; lists shorter than ``len_min`` stay whole.
    """
    if m <= 0:
        return []
    t = -(-m // len_max)
    if t > 1 and m // t < len_min:
        t = max(1, m // len_min)
    base, extra = divmod(m, t)
    out, a = [], 0
    for i in range(t):
        b = a + base + (1 if i < extra else 0)
        out.append((a, b))
        a = b
    return out


class WalkOutcome(NamedTuple):
    label: tuple[int, int]
    path: tuple[int, ...]
    reused: int


@dataclass
class _Pools:
    """Per-insertion sampler: fresh elements first, round-robin reuse after exhaustion."""

    intervals: list[npt.NDArray[np.int64]]
    trim: int
    rng: np.random.Generator
    explored: set = field(default_factory=set)
    orders: dict = field(default_factory=dict)
    reuse_cursor: dict = field(default_factory=dict)
    reused: int = 0

    def elements(self, j: int, trimmed: bool) -> npt.NDArray[np.int64]:
        items = self.intervals[j - 1]
        if trimmed and items.size > 2 * self.trim:
            return items[self.trim : items.size - self.trim]
        return items

    def draw(self, j: int, trimmed: bool, k: int) -> npt.NDArray[np.int64]:
        key = (j, trimmed)
        order = self.orders.get(key)
        if order is None:
            order = self.rng.permutation(self.elements(j, trimmed))
            self.orders[key] = order
        picked = []
        for e in order.tolist():
            if e not in self.explored:
                picked.append(e)
                if len(picked) == k:
                    break
        self.explored.update(picked)
        if len(picked) < k:
            c = self.reuse_cursor.get(key, 0)
            while len(picked) < k:
                picked.append(int(order[c % order.size]))
                c += 1
                self.reused += 1
            self.reuse_cursor[key] = c
        return np.asarray(picked, dtype=np.int64)


def _x_larger_than_majority(oracle, x: int, elems: npt.NDArray[np.int64]) -> bool:
    wins = int(np.count_nonzero(oracle.compare_many(np.full(elems.size, x), elems) > 0))
    # ties count as "x is smaller"
    return 2 * wins > elems.size


def insert_tree_walk(
    partition,
    x: int,
    oracle,
    params,
    *,
    rng: np.random.Generator | None = None,
    tree: WalkTree | None = None,
) -> WalkOutcome:
    """Walk ``params.walk_steps`` steps and return the final node's label ``(s1, s2)``.

    ``partition`` is the list of interval item arrays ``I_1..I_t`` in working order.
    """
    intervals = [np.asarray(p, dtype=np.int64) for p in partition]
    t = len(intervals)
    if tree is None:
        tree = build_walk_tree(t, params.walk_steps)
    if rng is None:
        rng = np.random.default_rng(params.seed)
    pools = _Pools(intervals, params.trim, rng)
    k = params.majority_k

    def boundary_ok(s1: int, s2: int) -> bool:
        if s1 - 1 >= 1 and not _x_larger_than_majority(oracle, x, pools.draw(s1 - 1, True, k)):
            return False
        if s2 + 1 <= t and _x_larger_than_majority(oracle, x, pools.draw(s2 + 1, True, k)):
            return False
        return True

    v = tree.root
    path = [v]
    for _ in range(params.walk_steps):
        node = tree.nodes[v]
        s1, s2 = node.label
        if not boundary_ok(s1, s2):
            nxt = node.parent if node.parent >= 0 else v
        elif node.chain:
            nxt = node.children[0] if node.children else v
        else:
            left, right = node.children
            median = tree.nodes[left].label[1]
            go_right = _x_larger_than_majority(oracle, x, pools.draw(median, False, k))
            nxt = right if go_right else left
        v = nxt
        path.append(v)
    return WalkOutcome(tree.nodes[v].label, tuple(path), pools.reused)
