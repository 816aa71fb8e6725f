"""Noisy tournaments, the memoised no-resampling oracle, and CSV ingestion.

Every pair outcome is a pure function of ``(seed, min(i, j), max(i, j))``
through a splitmix64-style counter hash, so lazily asking pairs in any order
realises exactly the same tournament as generating it in one shot.
"""

from __future__ import annotations

import csv
import threading
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from .core import QueryTable, Ranking

__all__ = [
    "NoiseParams",
    "CountingOracle",
    "TableOracle",
    "make_noisy_tournament",
    "flip_uniforms",
    "load_tournament_csv",
    "write_tournament_csv",
    "TournamentFormatError",
    "MalformedLineError",
    "SelfComparisonError",
    "ContradictoryDuplicateError",
    "IncompleteTournamentError",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


@dataclass(frozen=True)
class NoiseParams:
    """Noise advantage ``gamma`` (correct with probability ``1/2 + gamma``) and seed."""

    gamma: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma <= 0.5):
            raise ValueError(f"gamma must lie in (0, 1/2], got {self.gamma}")
        if not (0 <= self.seed <= _MASK):
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def p(self) -> float:
        return 0.5 + self.gamma

    @property
    def flip_probability(self) -> float:
        return 0.5 - self.gamma


def _mix_scalar(z: int) -> int:
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: npt.NDArray[np.uint64]) -> npt.NDArray[np.uint64]:
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def _pair_key(lo, hi):
    # triangular index; independent of n so sub-tournaments share outcomes
    return hi * (hi - 1) // 2 + lo


def _uniform_scalar(seed: int, lo: int, hi: int) -> float:
    h = _mix_scalar(_mix_scalar(seed) ^ _mix_scalar(_pair_key(lo, hi)))
    return (h >> 11) * 2.0**-53


def flip_uniforms(seed: int, lo: npt.ArrayLike, hi: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Per-pair uniform variates in ``[0, 1)``; a pair is flipped when below ``1/2 - gamma``."""
    lo = np.asarray(lo, dtype=np.uint64)
    hi = np.asarray(hi, dtype=np.uint64)
    s = np.uint64(_mix_scalar(int(seed)))
    h = _mix_array(s ^ _mix_array(_pair_key(lo, hi)))
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53


def make_noisy_tournament(pi: Ranking, params: NoiseParams) -> QueryTable:
    """Flip every entry of the noiseless table of ``pi`` independently w.p. ``1/2 - gamma``."""
    n = pi.n
    lo, hi = np.triu_indices(n, 1)
    r = pi.rank_of
    base = np.where(r[lo] > r[hi], 1, -1).astype(np.int8)
    flip = flip_uniforms(params.seed, lo, hi) < params.flip_probability
    upper = np.where(flip, -base, base)
    return QueryTable.from_upper(n, upper)


class _CountingBase:
    """Pair bookkeeping shared by the oracles: a seen-matrix and two counters."""

    def __init__(self, n: int) -> None:
        self._n = n
        self._seen = np.zeros((n, n), dtype=bool)
        self._distinct = 0
        self._total = 0
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self._n

    @property
    def distinct_queries(self) -> int:
        return self._distinct

    @property
    def total_accesses(self) -> int:
        return self._total

    @property
    def stats(self) -> tuple[int, int]:
        return self._distinct, self._total

    def query(self, i: int, j: int) -> int:
        """``q(a_i, a_j)``, materialising the pair on first use."""
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-comparison of item {i}")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"pair ({i}, {j}) out of range for n={self.n}")
        lo, hi = (i, j) if i < j else (j, i)
        with self._lock:
            self._total += 1
            if not self._seen[lo, hi]:
                self._seen[lo, hi] = True
                self._distinct += 1
        return self._outcome(i, j)

    def compare_many(self, i: npt.ArrayLike, j: npt.ArrayLike) -> npt.NDArray[np.int8]:
        """Vectorised :meth:`query`; counters advance exactly as for repeated scalar asks."""
        i = np.asarray(i, dtype=np.int64).reshape(-1)
        j = np.asarray(j, dtype=np.int64).reshape(-1)
        if i.shape != j.shape:
            raise ValueError("index arrays must have equal length")
        if i.size == 0:
            return np.zeros(0, dtype=np.int8)
        if np.any(i == j):
            raise ValueError("self-comparison in batch")
        if i.min() < 0 or j.min() < 0 or i.max() >= self.n or j.max() >= self.n:
            raise IndexError(f"pair out of range for n={self.n}")
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        with self._lock:
            self._total += int(i.size)
            fresh = ~self._seen[lo, hi]
            if fresh.any():
                keys = np.unique(lo[fresh] * self.n + hi[fresh])
                self._seen[keys // self.n, keys % self.n] = True
                self._distinct += int(keys.size)
        return self._outcomes(i, j, lo, hi)

    def materialize_all(self) -> QueryTable:
        """Ask every pair once (counted) and return the complete table."""
        lo, hi = np.triu_indices(self.n, 1)
        upper = self.compare_many(lo, hi)
        return QueryTable.from_upper(self.n, upper)

    def _outcome(self, i: int, j: int) -> int:
        raise NotImplementedError

    def _outcomes(self, i, j, lo, hi) -> npt.NDArray[np.int8]:
        raise NotImplementedError


class CountingOracle(_CountingBase):
    """Lazily materialised noisy tournament with query counters.

    ``distinct_queries`` counts unordered pairs ever asked; ``total_accesses``
    counts every ask. Repeated asks return the memoised outcome.
    """

    def __init__(self, truth: Ranking, params: NoiseParams) -> None:
        super().__init__(truth.n)
        self.truth = truth
        self.params = params
        self._audit: QueryTable | None = None

    def _outcome(self, i: int, j: int) -> int:
        lo, hi = (i, j) if i < j else (j, i)
        r = self.truth.rank_of
        base = 1 if r[i] > r[j] else -1
        if _uniform_scalar(self.params.seed, lo, hi) < self.params.flip_probability:
            base = -base
        return base

    def _outcomes(self, i, j, lo, hi) -> npt.NDArray[np.int8]:
        r = self.truth.rank_of
        base = np.where(r[i] > r[j], 1, -1).astype(np.int8)
        flip = flip_uniforms(self.params.seed, lo, hi) < self.params.flip_probability
        return np.where(flip, -base, base).astype(np.int8)

    def audit_table(self) -> QueryTable:
        """The full realised tournament for scoring and evaluation; not counted."""
        if self._audit is None:
            self._audit = make_noisy_tournament(self.truth, self.params)
        return self._audit


class TableOracle(_CountingBase):
    """Counting view of an existing ``QueryTable`` (e.g. one read from CSV); no known truth."""

    truth = None

    def __init__(self, table: QueryTable) -> None:
        super().__init__(table.n)
        self.table = table

    def _outcome(self, i: int, j: int) -> int:
        return int(self.table.matrix[i, j])

    def _outcomes(self, i, j, lo, hi) -> npt.NDArray[np.int8]:
        return self.table.matrix[i, j].astype(np.int8)

    def audit_table(self) -> QueryTable:
        return self.table


class TournamentFormatError(ValueError):
    """Base class for CSV tournament problems; ``line`` is 1-based (header is line 1)."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedLineError(TournamentFormatError):
    pass


class SelfComparisonError(TournamentFormatError):
    pass


class ContradictoryDuplicateError(TournamentFormatError):
    pass


class IncompleteTournamentError(TournamentFormatError):
    def __init__(self, message: str, missing: tuple[str, str]) -> None:
        self.missing = missing
        super().__init__(message)


_OUTCOMES = {"+": 1, "1": 1, "+1": 1, "-": -1, "-1": -1}


def _parse_rows(rows: Iterable[list[str]]) -> QueryTable:
    index: dict[str, int] = {}
    labels: list[str] = []
    result: dict[tuple[int, int], int] = {}

    def idx(name: str) -> int:
        if name not in index:
            index[name] = len(labels)
            labels.append(name)
        return index[name]

    it = iter(rows)
    header = next(it, None)
    if header is None or [h.strip() for h in header] != ["item_a", "item_b", "outcome"]:
        raise MalformedLineError("expected header 'item_a,item_b,outcome'", 1)
    for lineno, row in enumerate(it, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise MalformedLineError(f"expected 3 fields, got {len(row)}", lineno)
        a, b, out = (c.strip() for c in row)
        if not a or not b:
            raise MalformedLineError("empty item name", lineno)
        if out not in _OUTCOMES:
            raise MalformedLineError(f"unknown outcome {out!r}", lineno)
        if a == b:
            raise SelfComparisonError(f"item {a!r} compared with itself", lineno)
        i, j = idx(a), idx(b)
        # store as q(a_lo, a_hi)
        v = _OUTCOMES[out] if i < j else -_OUTCOMES[out]
        key = (min(i, j), max(i, j))
        prev = result.get(key)
        if prev is not None and prev != v:
            raise ContradictoryDuplicateError(f"pair ({a!r}, {b!r}) contradicts an earlier row", lineno)
        result[key] = v

    n = len(labels)
    m = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        for j in range(i + 1, n):
            v = result.get((i, j))
            if v is None:
                pair = (labels[i], labels[j])
                raise IncompleteTournamentError(f"missing comparison for pair {pair}", pair)
            m[i, j] = v
            m[j, i] = -v
    return QueryTable(m, labels)


def load_tournament_csv(path: str | Path) -> QueryTable:
    """Read ``item_a,item_b,outcome`` rows; ``+`` means ``item_a`` beat ``item_b``."""
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_rows(csv.reader(fh))


def write_tournament_csv(q: QueryTable, path_or_file) -> None:
    """Write one row per unordered pair, winner-agnostic (``+``/``-`` from ``item_a``'s side)."""
    labels = q.labels or tuple(str(i + 1) for i in range(q.n))

    def emit(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item_a", "item_b", "outcome"])
        m = q.matrix
        for i in range(q.n):
            for j in range(i + 1, q.n):
                w.writerow([labels[i], labels[j], "+" if m[i, j] > 0 else "-"])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
