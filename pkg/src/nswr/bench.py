"""Experiment harness: metrics, seeded sweeps, CSV/JSON rows, and the beat-rate check."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import QueryTable, Ranking, SizeMismatchError, score
from .exact import (
    EXHAUSTIVE_MAX_N,
    SUBSET_DP_MAX_N,
    SolverGuardError,
    optimal_ranking_exhaustive,
    optimal_ranking_subset_dp,
)
from .oracle import CountingOracle, NoiseParams, make_noisy_tournament
from .pipeline import NswrParams, noisy_sort_insertion, noisy_sort_query_efficient
from .theory import binom_cdf
from .window_dp import windowed_sort

__all__ = [
    "ALGORITHMS",
    "CSV_COLUMNS",
    "Metrics",
    "ExperimentConfig",
    "ResultRow",
    "SolveOutcome",
    "evaluate",
    "beat_probability_check",
    "copeland_order",
    "solve",
    "trial_seeds",
    "run_trial",
    "run_experiment",
    "write_rows",
    "read_rows",
    "summarize",
]

ALGORITHMS = ("exhaustive", "subset-dp", "window-dp", "insertion", "query-efficient")

CSV_COLUMNS = (
    "n",
    "gamma",
    "trial",
    "algorithm",
    "score_out",
    "score_truth",
    "sum_disloc",
    "max_disloc",
    "distinct_queries",
    "total_accesses",
    "wall_time_ms",
    "events",
)


@dataclass(frozen=True)
class Metrics:
    sum_dislocation: int
    max_dislocation: int
    score_out: int
    score_truth: int
    distinct_queries: int
    total_accesses: int
    wall_time_ms: float = 0.0


def evaluate(
    sigma: Ranking,
    pi: Ranking,
    q: QueryTable,
    counters: tuple[int, int] = (0, 0),
    wall_time_ms: float = 0.0,
) -> Metrics:
    """Dislocation of ``sigma`` against the truth ``pi`` plus both scores under ``q``."""
    if sigma.n != pi.n or q.n != pi.n:
        raise SizeMismatchError(f"size mismatch: sigma {sigma.n}, pi {pi.n}, q {q.n}")
    d = np.abs(sigma.rank_of - pi.rank_of)
    return Metrics(
        sum_dislocation=int(d.sum()),
        max_dislocation=int(d.max()) if d.size else 0,
        score_out=score(q, sigma),
        score_truth=score(q, pi),
        distinct_queries=int(counters[0]),
        total_accesses=int(counters[1]),
        wall_time_ms=float(wall_time_ms),
    )


def _with_inversions(m: int) -> Ranking:
    # smallest n admitting m inversions, then a Lehmer code summing to m
    n = 2
    while n * (n - 1) // 2 < m:
        n += 1
    pool, order, left = list(range(n)), [], m
    for i in range(n):
        c = min(left, n - 1 - i)
        order.append(pool.pop(c))
        left -= c
    return Ranking.from_order(order)


def beat_probability_check(gamma: float, m: int, trials: int, seed: int = 0) -> tuple[float, float]:
    """How often a ranking with ``m`` pair inversions scores at least as well as the truth.

    The truth is the identity; each trial draws a fresh noisy tournament and
    compares full scores. Returns ``(empirical_rate, P[Bin(m, 1/2 + gamma) <= m/2])``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    params = NoiseParams(gamma, 0)  # validates gamma
    sigma = _with_inversions(m)
    pi = Ranking.identity(sigma.n)
    seeds = np.random.SeedSequence([seed, m, int(round(gamma * 1e9))]).generate_state(trials, dtype=np.uint64)
    beats = 0
    for s in seeds.tolist():
        q = make_noisy_tournament(pi, NoiseParams(params.gamma, int(s)))
        beats += score(q, sigma) >= score(q, pi)
    return beats / trials, binom_cdf(m / 2, m, params.p)


def copeland_order(q: QueryTable) -> np.ndarray:
    """Items sorted by win count, smallest first; ties broken by item index."""
    wins = (q.matrix > 0).sum(axis=1)
    return np.lexsort((np.arange(q.n), wins)).astype(np.int64)


@dataclass(frozen=True)
class SolveOutcome:
    ranking: Ranking
    score: int
    query_stats: tuple[int, int]
    events: tuple[str, ...] = ()


def solve(algorithm: str, oracle, params: NswrParams) -> SolveOutcome:
    """Run one solver against an oracle (``CountingOracle`` or ``TableOracle``)."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    if algorithm in ("exhaustive", "subset-dp"):
        exhaustive = algorithm == "exhaustive"
        solver = optimal_ranking_exhaustive if exhaustive else optimal_ranking_subset_dp
        limit = EXHAUSTIVE_MAX_N if exhaustive else SUBSET_DP_MAX_N
        # refuse before paying for the full table
        if oracle.n > limit:
            raise SolverGuardError(f"{algorithm} limited to n <= {limit}, got {oracle.n}")
        ranking, s = solver(oracle.materialize_all())
        return SolveOutcome(ranking, s, oracle.stats)
    if algorithm == "window-dp":
        table = oracle.materialize_all()
        res = windowed_sort(table, copeland_order(table), params.window)
        ranking = Ranking.from_order(res.items)
        return SolveOutcome(ranking, score(table, ranking), oracle.stats)
    if algorithm == "insertion":
        res = noisy_sort_insertion(oracle, params)
        return SolveOutcome(res.ranking, res.score, oracle.stats, res.events)
    res = noisy_sort_query_efficient(oracle, params)
    return SolveOutcome(res.ranking, res.score, res.query_stats, res.events)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep over ``n x gamma x trial``.

    ``params`` holds ``NswrParams`` overrides applied on top of
    ``NswrParams.calibrated(n, gamma)``. Wall-clock timing is off by default so
    that identical configs give byte-identical output.
    """

    n: tuple[int, ...]
    gamma: tuple[float, ...]
    trials: int
    algorithm: str = "insertion"
    seed: int = 0
    params: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"
    timing: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", tuple(int(v) for v in np.atleast_1d(self.n)))
        object.__setattr__(self, "gamma", tuple(float(v) for v in np.atleast_1d(self.gamma)))
        if self.trials < 0:
            raise ValueError("trials must be non-negative")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")
        if any(v < 1 for v in self.n):
            raise ValueError("every n must be positive")
        for g in self.gamma:
            NoiseParams(g)
        if self.workers < 1:
            raise ValueError("workers must be positive")
        unknown = set(self.params) - {f.name for f in fields(NswrParams)}
        if unknown:
            raise ValueError(f"unknown NswrParams fields: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        allowed = {f.name for f in fields(cls)}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def resolved_params(self, n: int, gamma: float) -> NswrParams:
        return NswrParams.calibrated(n, gamma, **self.params)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["n"], d["gamma"] = list(self.n), list(self.gamma)
        return d


@dataclass(frozen=True)
class ResultRow:
    n: int
    gamma: float
    trial: int
    algorithm: str
    score_out: int
    score_truth: int
    sum_disloc: int
    max_disloc: int
    distinct_queries: int
    total_accesses: int
    wall_time_ms: float
    events: str = ""

    def to_csv_fields(self) -> list[str]:
        return [
            str(self.n),
            repr(self.gamma),
            str(self.trial),
            self.algorithm,
            str(self.score_out),
            str(self.score_truth),
            str(self.sum_disloc),
            str(self.max_disloc),
            str(self.distinct_queries),
            str(self.total_accesses),
            repr(self.wall_time_ms),
            self.events,
        ]

    @classmethod
    def from_csv_fields(cls, row: Sequence[str]) -> ResultRow:
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        n, gamma, trial, alg, so, st, sd, md, dq, ta, wt, ev = row
        return cls(
            int(n), float(gamma), int(trial), alg, int(so), int(st), int(sd), int(md), int(dq), int(ta), float(wt), ev
        )


def trial_seeds(config_seed: int, n: int, gamma: float, trial: int) -> tuple[int, int, int]:
    """``(permutation seed, noise seed, solver seed)`` for one cell; a pure function of its arguments."""
    ss = np.random.SeedSequence([int(config_seed), int(n), int(round(gamma * 1e9)), int(trial)])
    a, b, c = ss.generate_state(3, dtype=np.uint64).tolist()
    return int(a), int(b), int(c)


def run_trial(algorithm: str, n: int, gamma: float, trial: int, config_seed: int, overrides: dict, timing: bool) -> ResultRow:
    perm_seed, noise_seed, solver_seed = trial_seeds(config_seed, n, gamma, trial)
    pi = Ranking(np.random.default_rng(perm_seed).permutation(n))
    oracle = CountingOracle(pi, NoiseParams(gamma, noise_seed))
    params = NswrParams.calibrated(n, gamma, **{"seed": solver_seed, **overrides})
    t0 = time.perf_counter()
    out = solve(algorithm, oracle, params)
    elapsed = (time.perf_counter() - t0) * 1e3 if timing else 0.0
    m = evaluate(out.ranking, pi, oracle.audit_table(), out.query_stats, elapsed)
    return ResultRow(
        n=n,
        gamma=gamma,
        trial=trial,
        algorithm=algorithm,
        score_out=m.score_out,
        score_truth=m.score_truth,
        sum_disloc=m.sum_dislocation,
        max_disloc=m.max_dislocation,
        distinct_queries=m.distinct_queries,
        total_accesses=m.total_accesses,
        wall_time_ms=m.wall_time_ms,
        events=";".join(out.events),
    )


def _run_star(args) -> ResultRow:
    return run_trial(*args)


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """All rows in ``(n, gamma, trial)`` order, written to ``config.output`` when set."""
    jobs = [
        (config.algorithm, n, g, t, config.seed, dict(config.params), config.timing)
        for n in config.n
        for g in config.gamma
        for t in range(config.trials)
    ]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(config.workers) as ex:
            rows = list(ex.map(_run_star, jobs))
    else:
        rows = [_run_star(j) for j in jobs]
    if config.output:
        write_rows(rows, config.output, config.format, config)
    return rows


def _provenance(config: ExperimentConfig | None) -> dict:
    if config is None:
        return {}
    resolved = {f"{n},{g!r}": config.resolved_params(n, g).as_dict() for n in config.n for g in config.gamma}
    return {"config": config.as_dict(), "resolved_params": resolved}


def write_rows(rows: Iterable[ResultRow], path_or_file, fmt: str = "csv", config: ExperimentConfig | None = None) -> None:
    """CSV (fixed column order) or JSON.

    JSON output embeds the config and resolved ``NswrParams`` per cell; for a
    CSV file path they go to a ``.meta.json`` sidecar so the table stays plain.
    """
    rows = list(rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.to_csv_fields())
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({**_provenance(config), "rows": [asdict(r) for r in rows]}, indent=2) + "\n"
    else:
        raise ValueError("format must be 'csv' or 'json'")
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
        return
    path = Path(path_or_file)
    path.write_text(text, encoding="utf-8")
    if fmt == "csv" and config is not None:
        meta = path.with_name(path.name + ".meta.json")
        meta.write_text(json.dumps(_provenance(config), indent=2) + "\n", encoding="utf-8")


def read_rows(path_or_file) -> list[ResultRow]:
    """Parse a CSV written by :func:`write_rows`."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        text = Path(path_or_file).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ValueError("unexpected CSV header")
    return [ResultRow.from_csv_fields(r) for r in reader if r]


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
    return float(x.mean()), se


def summarize(rows: Iterable[ResultRow]) -> list[dict]:
    """Per ``(algorithm, n, gamma)`` cell: normalised dislocation means with standard errors.

    ``sum_disloc / n`` and ``max_disloc / log2 n`` are the quantities expected
    to stay flat in ``n``; ``queries_per_nlogn`` is ``distinct_queries / (n log2 n)``.
    """
    cells: dict[tuple[str, int, float], list[ResultRow]] = {}
    for r in rows:
        cells.setdefault((r.algorithm, r.n, r.gamma), []).append(r)
    out = []
    for (alg, n, g), rs in sorted(cells.items()):
        lg = math.log2(n) if n > 1 else 1.0
        sum_n = np.array([r.sum_disloc / n for r in rs])
        max_l = np.array([r.max_disloc / lg for r in rs])
        gap = np.array([r.score_out - r.score_truth for r in rs], dtype=float)
        dq = np.array([r.distinct_queries for r in rs], dtype=float)
        m_sum, se_sum = _mean_se(sum_n)
        m_max, se_max = _mean_se(max_l)
        out.append(
            {
                "algorithm": alg,
                "n": n,
                "gamma": g,
                "trials": len(rs),
                "sum_disloc_per_n": m_sum,
                "sum_disloc_per_n_se": se_sum,
                "max_disloc_per_log2n": m_max,
                "max_disloc_per_log2n_se": se_max,
                "score_gap_mean": float(gap.mean()),
                "distinct_queries_mean": float(dq.mean()),
                "queries_per_nlogn": float(dq.mean() / (n * lg)),
            }
        )
    return out
