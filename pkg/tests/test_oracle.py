import csv
import io
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_table
from nswr.core import QueryTable, Ranking, induced_queries
from nswr.oracle import (
    ContradictoryDuplicateError,
    CountingOracle,
    IncompleteTournamentError,
    MalformedLineError,
    NoiseParams,
    SelfComparisonError,
    TableOracle,
    TournamentFormatError,
    _parse_rows,
    flip_uniforms,
    load_tournament_csv,
    make_noisy_tournament,
    write_tournament_csv,
)


class TestNoiseParams:
    @pytest.mark.parametrize("gamma", [0.0, -0.1, 0.51])
    def test_gamma_range(self, gamma):
        with pytest.raises(ValueError):
            NoiseParams(gamma)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            NoiseParams(0.25, -1)
        NoiseParams(0.25, 2**64 - 1)

    def test_probabilities(self):
        p = NoiseParams(0.3)
        assert p.p == pytest.approx(0.8) and p.flip_probability == pytest.approx(0.2)


class TestGenerator:
    def test_half_is_noiseless(self):
        pi = Ranking(np.random.default_rng(0).permutation(30))
        assert make_noisy_tournament(pi, NoiseParams(0.5, 9)) == induced_queries(pi)

    def test_deterministic(self):
        pi = Ranking(np.random.default_rng(1).permutation(40))
        a = make_noisy_tournament(pi, NoiseParams(0.25, 3))
        assert a == make_noisy_tournament(pi, NoiseParams(0.25, 3))
        assert a != make_noisy_tournament(pi, NoiseParams(0.25, 4))

    def test_flip_fraction_concentrates(self):
        pi = Ranking.identity(1000)
        truth = induced_queries(pi).matrix
        iu = np.triu_indices(1000, 1)
        fracs = []
        for seed in range(40):
            q = make_noisy_tournament(pi, NoiseParams(0.25, seed))
            fracs.append(np.mean(q.matrix[iu] != truth[iu]))
        inside = np.mean([(0.24 <= f <= 0.26) for f in fracs])
        assert inside >= 0.99

    def test_pairs_independent_across_seeds(self):
        lo, hi = np.array([0, 0, 5]), np.array([1, 2, 9])
        flips = np.array([flip_uniforms(s, lo, hi) < 0.25 for s in range(10_000)])
        marg = flips.mean(axis=0)
        assert np.all(np.abs(marg - 0.25) < 0.02)
        r = np.corrcoef(flips.T.astype(float))
        assert np.all(np.abs(r[np.triu_indices(3, 1)]) < 0.05)

    def test_outcome_independent_of_n(self):
        # a pair's flip does not depend on how many other items exist
        small = make_noisy_tournament(Ranking.identity(10), NoiseParams(0.2, 7))
        big = make_noisy_tournament(Ranking.identity(50), NoiseParams(0.2, 7))
        assert np.array_equal(small.matrix, big.matrix[:10, :10])


class TestCountingOracle:
    def make(self, n=20, seed=5):
        pi = Ranking(np.random.default_rng(seed).permutation(n))
        return CountingOracle(pi, NoiseParams(0.25, seed))

    def test_memoised_reverse_ask(self):
        o = self.make()
        a = o.query(3, 7)
        b = o.query(7, 3)
        assert a == -b
        assert o.stats == (1, 2)

    def test_repeated_asks(self):
        o = self.make()
        first = o.query(2, 11)
        assert all(o.query(2, 11) == first for _ in range(1000))
        assert o.distinct_queries == 1 and o.total_accesses == 1001

    def test_lazy_matches_eager(self):
        o = self.make(n=25)
        table = make_noisy_tournament(o.truth, o.params)
        rng = np.random.default_rng(0)
        for i, j in rng.integers(0, 25, size=(300, 2)):
            if i != j:
                assert o.query(i, j) == table.q(i, j)
        assert o.materialize_all() == table

    def test_batch_counts_like_scalars(self):
        o = self.make()
        out = o.compare_many([1, 2, 1, 4], [2, 1, 3, 1])
        assert out[0] == -out[1]
        assert o.stats == (3, 4)
        assert o.compare_many([], []).size == 0

    def test_audit_is_uncounted(self):
        o = self.make()
        o.audit_table()
        assert o.stats == (0, 0)

    @pytest.mark.parametrize("i,j,exc", [(3, 3, ValueError), (0, 20, IndexError), (-1, 2, IndexError)])
    def test_bad_pairs(self, i, j, exc):
        o = self.make()
        with pytest.raises(exc):
            o.query(i, j)
        with pytest.raises(exc):
            o.compare_many([i], [j])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            self.make().compare_many([0, 1], [2])

    def test_thread_safe_counters(self):
        o = self.make(n=60)
        pairs = [(i, j) for i in range(60) for j in range(i + 1, 60)]

        def worker():
            for i, j in pairs:
                o.query(i, j)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert o.stats == (len(pairs), 4 * len(pairs))


@given(st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)).filter(lambda p: p[0] != p[1]), max_size=80))
def test_distinct_counts_unordered_pairs(asks):
    o = CountingOracle(Ranking.identity(12), NoiseParams(0.2, 1))
    for i, j in asks:
        o.query(i, j)
    assert o.distinct_queries == len({frozenset(p) for p in asks})
    assert o.total_accesses == len(asks)


def test_table_oracle_counts():
    _, q = random_table(9, 2)
    o = TableOracle(q)
    assert o.truth is None and o.audit_table() is q
    assert o.query(0, 4) == q.q(0, 4)
    assert o.query(4, 0) == q.q(4, 0)
    assert o.materialize_all() == q
    assert o.distinct_queries == 36


class TestCsv:
    def parse(self, text):
        return _parse_rows(csv.reader(io.StringIO(text)))

    def test_round_trip(self, tmp_path):
        _, q = random_table(7, 4)
        path = tmp_path / "t.csv"
        write_tournament_csv(q, path)
        back = load_tournament_csv(path)
        assert back == q
        assert back.labels == tuple(str(i + 1) for i in range(7))

    def test_labels_and_outcomes(self):
        q = self.parse("item_a,item_b,outcome\nA,B,+\nB,C,1\nC,A,-1\n")
        assert q.labels == ("A", "B", "C")
        assert q.q(0, 1) == 1 and q.q(1, 2) == 1 and q.q(2, 0) == -1

    def test_consistent_duplicates_and_blank_lines(self):
        q = self.parse("item_a,item_b,outcome\nA,B,+\n\nB,A,-\n")
        assert q.q(0, 1) == 1

    @pytest.mark.parametrize(
        "text,exc,line",
        [
            ("a,b,c\n", MalformedLineError, 1),
            ("item_a,item_b,outcome\nA,B\n", MalformedLineError, 2),
            ("item_a,item_b,outcome\nA,B,+\nA,C,x\n", MalformedLineError, 3),
            ("item_a,item_b,outcome\nA,,+\n", MalformedLineError, 2),
            ("item_a,item_b,outcome\nA,A,+\n", SelfComparisonError, 2),
            ("item_a,item_b,outcome\nA,B,+\nB,A,+\n", ContradictoryDuplicateError, 3),
        ],
    )
    def test_errors_carry_line_numbers(self, text, exc, line):
        with pytest.raises(exc) as info:
            self.parse(text)
        assert info.value.line == line
        assert f"line {line}" in str(info.value)

    def test_missing_pair_named(self):
        with pytest.raises(IncompleteTournamentError) as info:
            self.parse("item_a,item_b,outcome\nA,B,+\nB,C,+\n")
        assert info.value.missing == ("A", "C")
        assert isinstance(info.value, TournamentFormatError)

    def test_empty_file(self):
        with pytest.raises(MalformedLineError):
            self.parse("")

    def test_header_only_is_empty_tournament(self):
        q = self.parse("item_a,item_b,outcome\n")
        assert q == QueryTable(np.zeros((0, 0)))
