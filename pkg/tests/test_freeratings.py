import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from elicitsim import freeratings as fr
from elicitsim.dataset import ItemFeatureMatrix, SparseRatingMatrix
from elicitsim.recsys import FactorModel


def features(rows):
    """ItemFeatureMatrix with items 0..n-1 from dense 0/1 rows."""
    dim = len(rows[0])
    return ItemFeatureMatrix(range(len(rows)), [f"genre:g{k}" for k in range(dim)],
                             sp.csr_matrix(np.asarray(rows, float)), {"genre": (0, dim)})


def dense_vectors(rows):
    rows = np.asarray(rows, float)
    return fr.ItemVectors(range(len(rows)), sp.csr_matrix(rows))


class TestBuildVectors:
    def test_block_normalization(self):
        f = features([[1, 1, 0], [0, 1, 0]])
        v = fr.build_vectors(f, mode="features")
        assert v[0] == pytest.approx([1 / math.sqrt(2), 1 / math.sqrt(2), 0], abs=1e-12)
        assert v[1] == pytest.approx([0, 1, 0], abs=1e-12)

    def test_without_block_norm(self):
        f = features([[1, 1, 0]])
        assert fr.build_vectors(f, mode="features", block_norm=False)[0].tolist() == [1, 1, 0]

    def test_full_dimension(self):
        n_items, n_genres, n_actors, d = 4, 18, 24853, 50
        rng = np.random.default_rng(0)
        M = sp.random(n_items, n_genres + n_actors, density=0.001, random_state=1, format="csr")
        M.data[:] = 1.0
        f = ItemFeatureMatrix(range(n_items), [f"t{k}" for k in range(n_genres + n_actors)], M,
                              {"genre": (0, n_genres), "actor": (n_genres, n_genres + n_actors)})
        model = FactorModel((0,), tuple(range(n_items)), np.zeros((1, d)), rng.normal(size=(n_items, d)),
                            np.zeros(1), np.zeros(n_items), 3.0)
        v = fr.build_vectors(f, model, mode="features+embeddings")
        assert v.dim == 24921 == n_genres + n_actors + d

    def test_embedding_block_unit(self):
        f = features([[1, 0], [0, 1]])
        model = FactorModel((0,), (0, 1), np.zeros((1, 2)), np.array([[3.0, 4.0], [0.0, 2.0]]),
                            np.zeros(1), np.zeros(2), 3.0)
        v = fr.build_vectors(f, model, mode="features+embeddings")
        assert v[0] == pytest.approx([1, 0, 0.6, 0.8], abs=1e-12)
        assert np.linalg.norm(v[1]) == pytest.approx(math.sqrt(2))

    def test_embeddings_mode_needs_model(self):
        with pytest.raises(ValueError):
            fr.build_vectors(features([[1]]), mode="features+embeddings")

    def test_mode_aliases(self):
        assert fr.normalize_mode("features+embeddings") == fr.FEATURES_EMBEDDINGS
        with pytest.raises(ValueError):
            fr.normalize_mode("everything")


class TestMostSimilar:
    def test_examples(self):
        v = dense_vectors([[1, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
        assert fr.most_similar(0, v, [1, 2, 3]) == (1, pytest.approx(1.0))
        assert fr.most_similar(0, v, [2, 3])[0] == 3
        assert fr.most_similar(0, v, []) is None

    def test_ties_to_smallest_id(self):
        v = dense_vectors([[1, 0], [1, 0], [1, 0], [1, 0]])
        assert fr.most_similar(0, v, [3, 2, 1])[0] == 1

    def test_five_vectors_vs_oracle(self):
        rows = [[1, 0, 2], [2, 0, 4], [0, 1, 0], [1, 1, 1], [3, 0, 1]]
        v = dense_vectors(rows)
        for i in range(5):
            cands = [j for j in range(5) if j != i]
            j, s = fr.most_similar(i, v, cands)
            oj, os_ = oracles.most_similar(rows, i, cands)
            assert j == oj and s == pytest.approx(os_, abs=1e-12)

    def test_top_n(self):
        v = dense_vectors([[1, 0], [1, 0.1], [0, 1], [1, 0.5]])
        assert [j for j, _ in fr.most_similar(0, v, [1, 2, 3], n=2)] == [1, 3]

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(st.integers(0, 3), min_size=4, max_size=4), min_size=3, max_size=10),
           st.floats(0.1, 100))
    def test_scale_invariant(self, rows, c):
        v, scaled = dense_vectors(rows), dense_vectors(np.asarray(rows, float) * c)
        cands = list(range(1, len(rows)))
        a, b = fr.most_similar(0, v, cands), fr.most_similar(0, scaled, cands)
        assert a[1] == pytest.approx(b[1], abs=1e-9)
        # ids agree unless the top two are within rounding of each other
        if a[0] != b[0]:
            assert v.similarities(0)[a[0]] == pytest.approx(v.similarities(0)[b[0]], abs=1e-9)


class TestInfer:
    def vectors(self):
        return dense_vectors([[1, 0, 0], [1, 0.1, 0], [0, 1, 0], [0, 1, 0.1], [0, 0, 1], [0.1, 0, 1]])

    def test_copies_rating_to_nearest(self):
        K = SparseRatingMatrix()
        (event,) = fr.infer_free_ratings(0, [(0, 4)], self.vectors(), K)
        assert (event.source, event.target, event.rating) == (0, 1, 4)

    def test_budget_zero(self):
        assert fr.infer_free_ratings(0, [(0, 4)], self.vectors(), SparseRatingMatrix(), 0) == []

    def test_never_targets_known_or_elicited(self):
        K = SparseRatingMatrix([(0, 1, 2)])
        events = fr.infer_free_ratings(0, [(0, 4), (2, 5)], self.vectors(), K)
        assert [e.target for e in events] == [5, 3]

    def test_only_candidate_is_forced(self):
        K = SparseRatingMatrix([(0, j, 3) for j in (1, 2, 3, 4)])
        (event,) = fr.infer_free_ratings(0, [(0, 4)], self.vectors(), K)
        assert event.target == 5

    def test_exclude(self):
        events = fr.infer_free_ratings(0, [(0, 4)], self.vectors(), SparseRatingMatrix(), exclude={1})
        assert events[0].target != 1

    def test_targets_disjoint_across_sources(self):
        rng = np.random.default_rng(3)
        v = dense_vectors(rng.random((40, 5)))
        K = SparseRatingMatrix([(0, j, 3) for j in range(10, 15)])
        elicited = [(j, 4) for j in range(10)]
        events = fr.infer_free_ratings(0, elicited, v, K)
        targets = [e.target for e in events]
        assert len(events) == 10 and len(set(targets)) == 10
        assert not set(targets) & (set(range(15)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 3))
    def test_random_invariants(self, seed, budget):
        rng = np.random.default_rng(seed)
        v = dense_vectors(rng.integers(0, 2, (15, 6)))
        known = set(rng.choice(15, 4, replace=False).tolist())
        K = SparseRatingMatrix([(0, j, 3) for j in known])
        rest = [j for j in range(15) if j not in known]
        elicited = [(j, 5) for j in rest[:3]]
        events = fr.infer_free_ratings(0, elicited, v, K, budget)
        targets = [e.target for e in events]
        assert len(targets) == len(set(targets)) <= 3 * budget
        assert not set(targets) & (known | {j for j, _ in elicited})
        assert all(e.rating == 5 for e in events)
