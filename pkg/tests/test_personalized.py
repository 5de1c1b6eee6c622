import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import matrix_from_dense
from elicitsim import personalized as ps
from elicitsim import recsys
from elicitsim.dataset import SparseRatingMatrix
from elicitsim.errors import ParameterError
from elicitsim.recsys import FactorModel


def model_with_predictions(preds, user=0):
    """One-factor model whose predictions for ``user`` are exactly ``preds``."""
    n = len(preds)
    return FactorModel((user,), tuple(range(n)), np.zeros((1, 1)), np.zeros((n, 1)),
                       np.zeros(1), np.asarray(preds, float) - 3.0, 3.0, clamp=False)


class TestRatingOrders:
    def test_max_rating(self):
        m = model_with_predictions([2.0, 4.5, 3.0])
        assert ps.max_rating(0, m, [0, 1, 2]).items == [1, 2, 0]

    def test_min_rating(self):
        m = model_with_predictions([2.0, 4.5, 3.0])
        assert ps.min_rating(0, m, [0, 1, 2]).items == [0, 2, 1]

    def test_ties_ascending_id(self):
        m = model_with_predictions([3.0, 3.0, 3.0, 1.0])
        assert ps.max_rating(0, m, [2, 0, 1, 3]).items == [0, 1, 2, 3]
        assert ps.min_rating(0, m, [2, 0, 1, 3]).items == [3, 0, 1, 2]

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(1, 5), min_size=1, max_size=12, unique=True))
    def test_max_is_reverse_of_min_without_ties(self, preds):
        m = model_with_predictions(preds)
        pool = range(len(preds))
        assert ps.max_rating(0, m, pool).items == ps.min_rating(0, m, pool).items[::-1]

    def test_empty_pool(self):
        assert ps.max_rating(0, model_with_predictions([3.0]), []).items == []


class TestMinNorm:
    def test_orders_by_norm(self):
        Q = [[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]]
        m = FactorModel((0,), (0, 1, 2), np.zeros((1, 2)), np.array(Q), np.zeros(1), np.zeros(3), 3.0)
        assert ps.min_norm(0, m, [0, 1, 2]).items == [1, 2, 0]

    def test_unknown_item_counts_as_zero_norm(self):
        m = FactorModel((0,), (0,), np.zeros((1, 1)), np.ones((1, 1)), np.zeros(1), np.zeros(1), 3.0)
        assert ps.min_norm(0, m, [0, 7]).items == [7, 0]


class TestIKNN:
    R = [[5, 3, 0, 1],
         [4, 0, 4, 1],
         [1, 1, 5, 5],
         [0, 1, 5, 4]]

    def test_similarity_matches_oracle(self):
        sim = ps.ItemSimilarity(matrix_from_dense(self.R))
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert sim(i, j) == pytest.approx(oracles.adjusted_cosine(self.R, i, j), abs=1e-12)

    def test_predictions_match_oracle(self):
        R = [row[:] for row in self.R]
        K = matrix_from_dense(R)
        for u in range(4):
            pool = [i for i in range(4) if R[u][i] == 0]
            got = ps.iknn_predict(u, K, pool, k=2)
            assert got == pytest.approx([oracles.iknn_predict(R, u, i, 2) for i in pool], abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(st.integers(0, 5), min_size=5, max_size=5), min_size=4, max_size=6),
           st.integers(1, 4))
    def test_random_matrices_match_oracle(self, R, k):
        K = matrix_from_dense(R)
        sim = ps.ItemSimilarity(K)
        for u in range(len(R)):
            if not any(R[u]):
                continue
            pool = [i for i in range(5) if R[u][i] == 0 and i in sim.index]
            got = ps.iknn_predict(u, K, pool, k=k, similarity=sim)
            assert got == pytest.approx([oracles.iknn_predict(R, u, i, k) for i in pool], abs=1e-9)

    def test_identical_columns_have_similarity_one(self):
        R = [[5, 5, 1], [1, 1, 3], [4, 4, 2]]
        sim = ps.ItemSimilarity(matrix_from_dense(R))
        assert sim(0, 1) == pytest.approx(1.0, abs=1e-12)

    def test_single_corater_is_zero(self):
        R = [[5, 1, 0], [0, 2, 4], [3, 0, 3]]
        sim = ps.ItemSimilarity(matrix_from_dense(R))
        assert sim(0, 1) == 0 and sim(1, 2) == 0

    def test_no_neighbours_falls_back_to_user_mean(self):
        K = SparseRatingMatrix([(0, "a", 2), (0, "b", 4), (1, "c", 5)])
        assert ps.iknn_predict(0, K, ["c"]) == [3.0]

    def test_empty_profile_uses_item_mean(self):
        K = SparseRatingMatrix([(0, "a", 2), (1, "a", 4), (1, "b", 5)])
        assert ps.iknn_predict(9, K, ["a", "b"]) == [3.0, 5.0]

    def test_invalid_k(self):
        with pytest.raises(ParameterError):
            ps.iknn_predict(0, matrix_from_dense(self.R), [2], k=0)


class TestBinary:
    def test_defaults(self):
        cfg = ps.BINARY_TRAIN
        assert (cfg.d, cfg.learning_rate, cfg.regularization) == (291, 0.01834, 0.01467)
        assert ps.BINARY_ITERATIONS == 1501
        assert cfg.clamp is False

    def test_epoch_rule(self):
        assert ps.binary_epochs(1501) == 5
        assert ps.binary_epochs(100) == 15
        assert ps.binary_epochs(10) == 150

    def test_binarize(self):
        K = SparseRatingMatrix([(0, 0, 5), (1, 2, 1), (2, 1, 3), (2, 2, 4)])
        uu, ii, values = ps.binarize(K, [0, 1, 2], [0, 1, 2])
        dense = np.zeros((3, 3))
        dense[uu, ii] = values
        assert dense.tolist() == [[1, 0, 0], [0, 0, 1], [0, 1, 1]]
        assert len(values) == 9

    def test_popular_items_rank_first(self):
        # item 0 rated by everyone, item 9 by nobody
        K = SparseRatingMatrix([(u, 0, 4) for u in range(20)] + [(u, 1 + u % 8, 3) for u in range(20)])
        cfg = ps.BINARY_TRAIN.replace(d=4, epochs=200, seed=1)
        bmodel = ps.train_binary(K, range(20), range(10), cfg)
        score = recsys.predict_many(bmodel, 0, range(10))
        assert score[0] > score[9]
        assert ps.binary(0, bmodel, range(10)).items[0] == 0


class TestNonMyopic:
    def rankings(self):
        return (ps.UserRanking(0, (("a", 0.1), ("b", 0.2), ("c", 0.3))),
                ps.UserRanking(0, (("c", 1.0), ("b", 2.0), ("a", 3.0))))

    def test_first_round_is_min_rating(self):
        norm, rating = self.rankings()
        assert ps.non_myopic(0, 1, 10, norm, rating).items == rating.items

    def test_last_round_is_min_norm(self):
        norm, rating = self.rankings()
        assert ps.non_myopic(0, 11, 10, norm, rating).items == norm.items

    def test_half_weight_ties_by_id(self):
        norm, rating = self.rankings()
        # every item blends to rank 2
        assert ps.non_myopic(0, 6, 10, norm, rating).items == ["a", "b", "c"]

    def test_total_iter_zero(self):
        norm, rating = self.rankings()
        with pytest.raises(ParameterError):
            ps.non_myopic(0, 1, 0, norm, rating)


def test_combine_ranks_warns_on_mismatch(caplog):
    got = ps.combine_ranks(0, {"a": 1, "b": 2}, {"a": 1}, 0.5)
    assert got.items == ["a"]
    assert "rank pools differ" in caplog.text
