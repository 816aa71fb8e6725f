"""Asymptotic constants of the analysis, evaluated numerically.

These are reported for comparison with the calibrated ``NswrParams``; none
of the solvers read them. All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

__all__ = ["TheoryConstants", "theory_constants", "binom_cdf"]


def binom_cdf(x: float, trials: int, p: float) -> float:
    """Exact ``P[Bin(trials, p) <= x]`` by summation."""
    top = math.floor(x)
    if top < 0:
        return 0.0
    if top >= trials:
        return 1.0
    return math.fsum(math.comb(trials, j) * p**j * (1 - p) ** (trials - j) for j in range(top + 1))


@dataclass(frozen=True)
class TheoryConstants:
    gamma: float
    beta: float
    n: int
    epsilon: float
    p1: float
    m1: float
    m2: float
    c2: float
    c3: float
    majority_k: int
    walk_c2: int
    C: float
    c4: float

    def as_dict(self) -> dict:
        return asdict(self)


def _majority_k(p: float) -> int:
    # smallest k with P[Bin(k, p) > k/2] > 1 - 1e-3
    k = 1
    while 1.0 - binom_cdf(k / 2, k, p) <= 1 - 1e-3:
        k += 1
    return k


def _walk_c2(n: int, beta: float) -> int:
    # smallest integer c with P[Bin(c log n, 0.99) < (c/2) log n + 2 log n] < n^(-beta-1)
    logn = math.log2(n)
    target = n ** (-beta - 1)
    c = 1
    while True:
        trials = math.ceil(c * logn)
        threshold = c / 2 * logn + 2 * logn
        # strict "<": P[X <= ceil(threshold) - 1]
        if binom_cdf(math.ceil(threshold) - 1, trials, 0.99) < target:
            return c
        c += 1


def theory_constants(gamma: float, beta: float, n: int, epsilon: float | None = None) -> TheoryConstants:
    if not (0 < gamma <= 0.5):
        raise ValueError(f"gamma must lie in (0, 1/2], got {gamma}")
    if n < 2:
        raise ValueError("n must be at least 2")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if epsilon is None:
        epsilon = n ** (-beta - 1) / 4
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    logn = math.log2(n)
    p1 = math.exp(-(gamma**2) / 16)
    m1 = (-math.log2(epsilon) + 2 * logn) / math.log2(1 / p1)
    m2 = 2 * m1
    c2 = 70 / gamma**2
    c3 = 500 / gamma**2 * m2 / logn
    k = _majority_k(0.5 + gamma)
    wc2 = _walk_c2(n, beta)
    return TheoryConstants(
        gamma=gamma,
        beta=beta,
        n=n,
        epsilon=epsilon,
        p1=p1,
        m1=m1,
        m2=m2,
        c2=c2,
        c3=c3,
        majority_k=k,
        walk_c2=wc2,
        C=3 * k * wc2,
        c4=24 * c3 + 3,
    )
