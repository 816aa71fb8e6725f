"""Command-line entry point: ``nswr {generate,solve,experiment,constants}``.

Exit codes: 0 on success, 1 when an exact solver refuses the instance size,
2 on usage, input-file or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import ALGORITHMS, ExperimentConfig, evaluate, run_experiment, solve, summarize, write_rows
from .core import Ranking
from .exact import SolverGuardError
from .oracle import (
    CountingOracle,
    NoiseParams,
    TableOracle,
    TournamentFormatError,
    load_tournament_csv,
    make_noisy_tournament,
    write_tournament_csv,
)
from .pipeline import NswrParams
from .theory import theory_constants

EXIT_OK, EXIT_GUARD, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="number of items")
    p.add_argument("--gamma", type=float, default=0.25, help="noise advantage in (0, 1/2] (default 0.25)")
    p.add_argument("--seed", type=int, default=0, help="instance seed (default 0)")


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", type=int)
    p.add_argument("--block-len", type=int)
    p.add_argument("--majority-k", type=int)
    p.add_argument("--walk-steps", type=int)
    p.add_argument("--beta", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nswr", description="Maximum-likelihood ranking from one-shot noisy comparisons.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded noisy tournament as CSV")
    _add_instance_flags(g)
    g.add_argument("--output", help="CSV path (default stdout)")

    s = sub.add_parser("solve", help="rank a tournament file or a generated instance")
    _add_instance_flags(s)
    _add_param_flags(s)
    s.add_argument("--input", help="tournament CSV with header item_a,item_b,outcome")
    s.add_argument("--algorithm", choices=ALGORITHMS, default="insertion")
    s.add_argument("--output", help="result path (default stdout)")
    s.add_argument("--format", choices=("json", "csv"), default="json")

    e = sub.add_parser("experiment", help="run a seeded sweep described by a JSON config")
    e.add_argument("--config", required=True, help="JSON with keys n, gamma, trials, algorithm, seed, params, output, format")
    e.add_argument("--output", help="overrides the config's output path")
    e.add_argument("--format", choices=("csv", "json"), help="overrides the config's format")
    e.add_argument("--summary", action="store_true", help="also print per-cell summaries to stderr")

    c = sub.add_parser("constants", help="evaluate the asymptotic constants as JSON")
    c.add_argument("--gamma", type=float, required=True)
    c.add_argument("--beta", type=float, default=1.0)
    c.add_argument("--n", type=int, required=True)
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _overrides(args) -> dict:
    return {
        k: v
        for k, v in {
            "window": args.window,
            "block_len": args.block_len,
            "majority_k": args.majority_k,
            "walk_steps": args.walk_steps,
            "beta": args.beta,
        }.items()
        if v is not None
    }


def _noise(args) -> NoiseParams:
    try:
        return NoiseParams(args.gamma, args.seed)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _cmd_generate(args) -> int:
    if args.n is None or args.n < 1:
        raise _UsageError("generate needs --n >= 1")
    noise = _noise(args)
    pi = Ranking(np.random.default_rng(args.seed).permutation(args.n))
    q = make_noisy_tournament(pi, noise)
    if args.output:
        write_tournament_csv(q, args.output)
    else:
        write_tournament_csv(q, sys.stdout)
    return EXIT_OK


def _cmd_solve(args) -> int:
    pi = None
    if args.input:
        table = load_tournament_csv(args.input)
        oracle = TableOracle(table)
        labels = list(table.labels or [str(i + 1) for i in range(table.n)])
    else:
        if args.n is None or args.n < 1:
            raise _UsageError("solve needs --input or --n >= 1")
        noise = _noise(args)
        pi = Ranking(np.random.default_rng(args.seed).permutation(args.n))
        oracle = CountingOracle(pi, noise)
        labels = [str(i + 1) for i in range(args.n)]
    n = oracle.n
    try:
        params = NswrParams.calibrated(n, args.gamma, seed=args.seed, **_overrides(args))
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    out = solve(args.algorithm, oracle, params)
    best_first = [labels[i] for i in out.ranking.order[::-1]]
    result = {
        "algorithm": args.algorithm,
        "n": n,
        "score": out.score,
        "ranking": best_first,
        "distinct_queries": out.query_stats[0],
        "total_accesses": out.query_stats[1],
        "events": list(out.events),
        "params": params.as_dict(),
    }
    if pi is not None:
        m = evaluate(out.ranking, pi, oracle.audit_table(), out.query_stats)
        result.update(score_truth=m.score_truth, sum_disloc=m.sum_dislocation, max_disloc=m.max_dislocation)
    if args.format == "json":
        text = json.dumps(result, indent=2) + "\n"
    else:
        text = "rank,item\n" + "".join(f"{r},{item}\n" for r, item in enumerate(best_first, start=1))
    _emit(text, args.output)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    try:
        config = ExperimentConfig.from_json(args.config)
        if args.output or args.format:
            config = replace(config, output=args.output or config.output, format=args.format or config.format)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise _UsageError(f"bad config: {exc}") from exc
    rows = run_experiment(config)
    if not config.output:
        write_rows(rows, sys.stdout, config.format, config)
    if args.summary:
        for cell in summarize(rows):
            print(json.dumps(cell), file=sys.stderr)
    return EXIT_OK


def _cmd_constants(args) -> int:
    try:
        tc = theory_constants(args.gamma, args.beta, args.n)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    sys.stdout.write(json.dumps(tc.as_dict(), indent=2) + "\n")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "experiment": _cmd_experiment,
    "constants": _cmd_constants,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except SolverGuardError as exc:
        print(f"nswr: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (_UsageError, TournamentFormatError, OSError) as exc:
        print(f"nswr: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
