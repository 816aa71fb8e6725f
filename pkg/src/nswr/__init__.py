"""Maximum-likelihood ranking when every pair is compared exactly once with noise.

Quick start::

    import numpy as np
    from nswr import CountingOracle, NoiseParams, NswrParams, Ranking, noisy_sort_insertion

    truth = Ranking(np.random.default_rng(0).permutation(200))
    oracle = CountingOracle(truth, NoiseParams(gamma=0.25, seed=1))
    result = noisy_sort_insertion(oracle, NswrParams.calibrated(200, 0.25))
"""

from .core import (
    QueryTable,
    Ranking,
    SizeMismatchError,
    disagreement_distance,
    dislocation_distance,
    induced_queries,
    inversion_count,
    max_score,
    score,
)
from .exact import SolverGuardError, optimal_ranking_exhaustive, optimal_ranking_subset_dp
from .oracle import (
    CountingOracle,
    NoiseParams,
    TableOracle,
    load_tournament_csv,
    make_noisy_tournament,
    write_tournament_csv,
)
from .pipeline import NswrParams, insert_coarse, noisy_sort_insertion, noisy_sort_query_efficient, polish
from .theory import TheoryConstants, theory_constants
from .window_dp import sort_presorted, windowed_sort

__version__ = "0.1.0"

__all__ = [
    "CountingOracle",
    "NoiseParams",
    "NswrParams",
    "QueryTable",
    "Ranking",
    "SizeMismatchError",
    "SolverGuardError",
    "TableOracle",
    "TheoryConstants",
    "disagreement_distance",
    "dislocation_distance",
    "induced_queries",
    "insert_coarse",
    "inversion_count",
    "load_tournament_csv",
    "make_noisy_tournament",
    "max_score",
    "noisy_sort_insertion",
    "noisy_sort_query_efficient",
    "optimal_ranking_exhaustive",
    "optimal_ranking_subset_dp",
    "polish",
    "score",
    "sort_presorted",
    "theory_constants",
    "windowed_sort",
    "write_tournament_csv",
]
