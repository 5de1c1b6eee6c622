import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import matrix_from_dense
from elicitsim import nonpersonalized as npz
from elicitsim.dataset import SparseRatingMatrix


def stats_for(column_ratings, total_users=None):
    """ItemStats for a single item 0 rated with ``column_ratings`` by users 0..n-1."""
    K = SparseRatingMatrix((u, 0, r) for u, r in enumerate(column_ratings))
    return npz.ItemStats(K, pool=[0], total_users=total_users)


def one(scorer, ratings, **kw):
    return scorer(stats_for(ratings), **kw)[0]


def dense_stats(R):
    return npz.ItemStats(matrix_from_dense(R), pool=range(len(R[0])), total_users=len(R))


class TestHandValues:
    def test_variance(self):
        assert one(npz.variance, [3, 3, 3]) == 0
        assert one(npz.variance, [2, 4]) == pytest.approx(1.0, abs=1e-12)
        assert one(npz.variance, []) == 0

    def test_entropy(self):
        assert one(npz.entropy, [5, 5, 5, 5]) == 0
        assert one(npz.entropy, [1, 1, 2, 2]) == pytest.approx(math.log(2), abs=1e-12)
        assert one(npz.entropy, [1, 2, 3, 4, 5]) == pytest.approx(math.log(5), abs=1e-12)

    def test_entropy0(self):
        assert npz.entropy0(stats_for([5, 5], total_users=4))[0] == pytest.approx(math.log(2), abs=1e-12)
        assert npz.entropy0(stats_for([4, 4, 4], total_users=3))[0] == 0
        assert npz.entropy0(stats_for([], total_users=6))[0] == 0

    def test_co_coverage(self):
        assert npz.co_coverage(stats_for([3, 4]))[0] == 0
        both = dense_stats([[3, 4], [5, 1]])
        assert npz.co_coverage(both) == {0: 2, 1: 2}
        chain = npz.ItemStats(SparseRatingMatrix([("u", "a", 1), ("u", "b", 2), ("v", "b", 3), ("v", "c", 4)]))
        assert npz.co_coverage(chain) == {"a": 1, "b": 2, "c": 1}

    def test_popularity(self):
        assert one(npz.popularity, [1] * 7) == 7
        assert one(npz.popularity, []) == 0

    def test_popularity_recount(self):
        rng = np.random.default_rng(1)
        triples = {(int(u), int(i)): int(r) for u, i, r in rng.integers([0, 0, 1], [30, 15, 6], (200, 3))}
        K = SparseRatingMatrix((u, i, r) for (u, i), r in triples.items())
        scores = npz.popularity(npz.ItemStats(K))
        for item in K.items:
            assert scores[item] == sum(1 for (u, i) in triples if i == item)

    def test_pop_entropy(self):
        assert one(npz.pop_entropy, [4]) == 0
        assert one(npz.pop_entropy, [1, 2]) == pytest.approx(math.log(2) ** 2, abs=1e-12)
        assert one(npz.pop_entropy, [3] * 9) == 0

    def test_pop_variance(self):
        assert one(npz.pop_variance, [1, 1, 3, 3]) == pytest.approx(2.0, abs=1e-12)
        assert one(npz.pop_variance, [2, 2, 2]) == 0
        assert one(npz.pop_variance, [5]) == 0

    def test_helf(self):
        assert npz.helf(stats_for([4], total_users=10))[0] == 0
        assert npz.helf(stats_for([4, 4, 4], total_users=10))[0] == 0

    def test_helf_classic(self):
        s = stats_for([1, 2, 3, 3], total_users=50)
        lp, ent = math.log(4), one(npz.entropy, [1, 2, 3, 3])
        a, b = lp / math.log(50), ent / math.log(5)
        assert npz.helf(s, classic=True)[0] == pytest.approx(2 * a * b / (a + b), abs=1e-12)


def test_helf_hand_value(monkeypatch):
    # pin pop=10 and Ent=1 with |U|=100
    stats = stats_for([1], total_users=100)
    stats.counts = np.array([10])
    monkeypatch.setattr(npz, "_entropies", lambda s: np.array([1.0]))
    got = npz.helf(stats)[0]
    expected = 2 * math.log(10) / (math.log(100) * math.log(5) * (math.log(10) + 1 / math.log(5)))
    assert got == pytest.approx(0.2125, abs=5e-5)
    assert got == pytest.approx(expected, abs=1e-12)


def random_dense(rng, n_users=4, n_items=4):
    return rng.integers(0, 6, (n_users, n_items)).tolist()


def check_against_oracle(R, tol=1e-12):
    stats = dense_stats(R)
    bad = []
    for name, oracle in oracles.SCORERS.items():
        got = npz.score(name, stats)
        for i in range(len(R[0])):
            if abs(got[i] - oracle(R, i)) > tol:
                bad.append((name, i, got[i], oracle(R, i)))
    return bad


def test_oracle_equivalence_sampled():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        assert check_against_oracle(random_dense(rng)) == []


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(0, 5), min_size=4, max_size=4), min_size=4, max_size=4),
       st.permutations(range(4)))
def test_permutation_equivariant_and_bounded(R, perm):
    stats = dense_stats(R)
    relabelled = dense_stats([R[p] for p in perm])
    for name in oracles.SCORERS:
        assert npz.score(name, stats) == pytest.approx(npz.score(name, relabelled), abs=1e-12)
    for name in ("popularity", "co_coverage"):
        assert all(float(v).is_integer() for v in npz.score(name, stats).values())
    for name in ("entropy", "entropy0"):
        assert all(0 <= v <= math.log(6) + 1e-12 for v in npz.score(name, stats).values())
    assert all(0 <= v <= 4 for v in npz.variance(stats).values())
    assert all(math.isfinite(v) for name in oracles.SCORERS for v in npz.score(name, stats).values())


def test_zero_rater_items_score_zero():
    K = SparseRatingMatrix([(0, "a", 3), (1, "a", 5)])
    stats = npz.ItemStats(K, pool=["a", "z"], total_users=2)
    for name in npz.STRATEGY_NAMES:
        if name != "random":
            assert npz.score(name, stats)["z"] == 0


def test_co_rating_on_demand():
    stats = dense_stats([[1, 2, 0], [3, 0, 4], [5, 5, 5]])
    assert stats.co_rating(0, 1) == 2 and stats.co_rating(1, 2) == 1
    assert stats.histogram.sum(axis=1).tolist() == stats.counts.tolist()


class TestRandom:
    def test_deterministic(self):
        assert npz.random_score(range(20), seed=3) == npz.random_score(range(20), seed=3)

    def test_seeds_differ(self):
        a, b = npz.random_score(range(10), seed=1), npz.random_score(range(10), seed=2)
        assert sorted(a, key=a.get) != sorted(b, key=b.get)

    def test_unit_interval(self):
        assert all(0 <= v < 1 for v in npz.random_score(range(50), seed=0).values())


def test_unknown_strategy():
    with pytest.raises(KeyError):
        npz.score("nope", dense_stats([[1]]))
