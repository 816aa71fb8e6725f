"""Time the numba kernels against their fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each case runs once to warm the JIT cache, then reports the best of
``--repeat`` runs for both paths and checks that they agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nswr import _accel
from nswr._kernels import (
    BINOM,
    exhaustive_kernel,
    exhaustive_numpy,
    subset_dp_kernel,
    subset_dp_numpy,
    window_dp_kernel,
)
from nswr.core import Ranking
from nswr.oracle import NoiseParams, make_noisy_tournament
from nswr.window_dp import band_gains, interval_tree


def _table(n: int, seed: int) -> np.ndarray:
    pi = Ranking(np.random.default_rng(seed).permutation(n))
    return np.ascontiguousarray(make_noisy_tournament(pi, NoiseParams(0.25, seed)).matrix)


def _best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _window_case(m: int, k: int, seed: int):
    q = make_noisy_tournament(Ranking(np.random.default_rng(seed).permutation(m)), NoiseParams(0.25, seed))
    gains = band_gains(q, np.arange(m), k)
    lo, hi, left, right = interval_tree(m)
    fast = lambda: window_dp_kernel(lo, hi, left, right, gains, k, BINOM)[:2]  # noqa: E731
    slow = lambda: window_dp_kernel.py_func(lo, hi, left, right, gains, k, BINOM)[:2]  # noqa: E731
    return fast, slow


def cases(quick: bool):
    n_ex = 8 if quick else 9
    n_dp = 14 if quick else 17
    Q1, Q2 = _table(n_ex, 1), _table(n_dp, 2)
    yield f"exhaustive n={n_ex}", lambda: exhaustive_kernel(Q1), lambda: exhaustive_numpy(Q1)
    yield f"subset-dp n={n_dp}", lambda: subset_dp_kernel(Q2), lambda: subset_dp_numpy(Q2)
    for m, k in ([(40, 2), (25, 3)] if quick else [(200, 2), (60, 3), (33, 4)]):
        fast, slow = _window_case(m, k, 3)
        yield f"window-dp m={m} k={k}", fast, slow


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller instances")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the fallback path exists")
        return 1
    print(f"{'case':<24}{'numba ms':>12}{'fallback ms':>14}{'speedup':>10}  agree")
    for name, fast, slow in cases(args.quick):
        fast()  # JIT warm-up
        tf, of = _best_of(fast, args.repeat)
        ts, os_ = _best_of(slow, max(1, args.repeat // 2))
        agree = _agree(of, os_)
        print(f"{name:<24}{tf * 1e3:>12.2f}{ts * 1e3:>14.2f}{ts / tf:>9.1f}x  {agree}")
    return 0


def _agree(a, b) -> bool:
    # kernels return (rank_of or positions, score); scores must match, orders should
    return int(a[1]) == int(b[1]) and np.array_equal(np.asarray(a[0]), np.asarray(b[0]))


if __name__ == "__main__":
    raise SystemExit(main())
