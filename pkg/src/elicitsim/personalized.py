"""Personalized scorers: a per-user ordering of that user's candidate items.

Orderings are best first; equal scores fall back to ascending item id.
Rank-blending strategies use 1-based ranks where 1 is best and sort the
blended score ascending.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import recsys
from .errors import ParameterError
from .recsys import TrainConfig

log = logging.getLogger(__name__)

BINARY_ITERATIONS = 1501
BINARY_TRAIN = TrainConfig(d=291, learning_rate=0.01834, regularization=0.01467,
                           epochs=5, clamp=False)
IKNN_K = 40
IKNN_MIN_CORATERS = 2


@dataclass(frozen=True)
class UserRanking:
    user: object
    entries: tuple  # ((item, score), ...) best first

    @property
    def items(self):
        return [item for item, _ in self.entries]

    def __len__(self):
        return len(self.entries)

    def ranks(self):
        """``{item: rank}`` with rank 1 for the first entry."""
        return {item: n for n, (item, _) in enumerate(self.entries, start=1)}

    def top(self, n):
        return self.items[:n]


def order_by_score(user, items, scores, descending=True):
    pairs = sorted(zip(items, (float(s) for s in scores)),
                   key=(lambda p: (-p[1], p[0])) if descending else (lambda p: (p[1], p[0])))
    return UserRanking(user, tuple(pairs))


def combine_ranks(user, first, second, weight):
    """Blend two rank maps as ``weight * first + (1 - weight) * second``.

    ``first`` and ``second`` map item to rank (1 = best). Only items in both
    maps are ranked; a disagreement is logged.
    """
    common = set(first) & set(second)
    if len(common) != len(first) or len(common) != len(second):
        log.warning("rank pools differ for user %r; ranking %d shared items", user, len(common))
    items = sorted(common)
    scores = [weight * first[i] + (1.0 - weight) * second[i] for i in items]
    return order_by_score(user, items, scores, descending=False)


def max_rating(user, model, pool):
    pool = sorted(pool)
    return order_by_score(user, pool, recsys.predict_many(model, user, pool) if pool else [])


def min_rating(user, model, pool):
    pool = sorted(pool)
    return order_by_score(user, pool, recsys.predict_many(model, user, pool) if pool else [],
                          descending=False)


def _norms(model, items):
    out = []
    for item in items:
        try:
            out.append(recsys.item_latent_norm(model, item))
        except KeyError:
            out.append(0.0)  # never trained: no latent signal yet
    return out


def min_norm(user, model, pool):
    pool = sorted(pool)
    return order_by_score(user, pool, _norms(model, pool), descending=False)


def non_myopic(user, iteration, total_iter, min_norm_ranking, min_rating_ranking):
    """Shift from MinRating to MinNorm as rounds progress.

    The weight on MinNorm is ``(iteration - 1) / total_iter``.
    """
    if total_iter <= 0:
        raise ParameterError("total_iter must be positive")
    weight = (iteration - 1) / total_iter
    return combine_ranks(user, min_norm_ranking.ranks(), min_rating_ranking.ranks(), weight)


class ItemSimilarity:
    """Adjusted-cosine item similarities over co-raters in ``K``.

    Ratings are centred on each user's mean in ``K``; both the dot product
    and the two norms run over users who rated both items. Pairs with fewer
    than ``min_coraters`` co-raters, or a zero norm, have similarity 0.
    """

    def __init__(self, K, min_coraters=IKNN_MIN_CORATERS):
        self.items = K.items
        self.index = {item: n for n, item in enumerate(self.items)}
        users = K.users
        uidx = {u: n for n, u in enumerate(users)}
        self.user_means = {u: float(np.mean(list(K.row(u).values()))) for u in users}
        rows, cols, centred = [], [], []
        for u in users:
            mean = self.user_means[u]
            for item, r in K.row(u).items():
                rows.append(uidx[u])
                cols.append(self.index[item])
                centred.append(r - mean)
        shape = (len(users), len(self.items))
        C = sp.csr_matrix((centred, (rows, cols)), shape=shape)
        B = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=shape)
        dot = (C.T @ C).toarray()
        sq = (C.multiply(C).T @ B).toarray()  # sq[i, j]: sum over raters of both of c_ui^2
        co = (B.T @ B).toarray()
        with np.errstate(invalid="ignore", divide="ignore"):
            sim = dot / np.sqrt(sq * sq.T)
        sim[~np.isfinite(sim) | (co < min_coraters)] = 0.0
        np.fill_diagonal(sim, 0.0)
        self.matrix = sim
        self.global_mean = float(np.mean([r for *_, r in K.triples()])) if len(K) else 0.0
        self.item_means = {i: float(np.mean(list(K.column(i).values()))) for i in self.items}

    def __call__(self, i, j):
        a, b = self.index.get(i), self.index.get(j)
        if a is None or b is None or a == b:
            return 0.0
        return float(self.matrix[a, b])


def iknn_predict(user, K, pool, k=IKNN_K, similarity=None):
    """Item-kNN rating estimates of ``user`` for each item of ``pool``.

    Each estimate is the similarity-weighted mean of the user's ratings on
    the ``k`` most similar positively-similar items they rated. Items with
    no such neighbour get the user's mean rating.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    sim = ItemSimilarity(K) if similarity is None else similarity
    pool = sorted(pool)
    rated = K.row(user)
    if not rated:
        return [sim.item_means.get(i, sim.global_mean) for i in pool]
    user_mean = float(np.mean(list(rated.values())))
    rated_items = sorted(i for i in rated if i in sim.index)
    rated_idx = np.array([sim.index[i] for i in rated_items], dtype=np.int64)
    rated_vals = np.array([rated[i] for i in rated_items], dtype=np.float64)
    out = []
    for item in pool:
        n = sim.index.get(item)
        if n is None or len(rated_idx) == 0:
            out.append(user_mean)
            continue
        s = sim.matrix[n, rated_idx]
        positive = np.flatnonzero(s > 0)
        if len(positive) == 0:
            out.append(user_mean)
            continue
        # stable sort on -s keeps ascending id among equal similarities
        best = positive[np.argsort(-s[positive], kind="stable")[:k]]
        out.append(float(s[best] @ rated_vals[best] / s[best].sum()))
    return out


def iknn(user, K, pool, k=IKNN_K, similarity=None):
    pool = sorted(pool)
    return order_by_score(user, pool, iknn_predict(user, K, pool, k, similarity))


def binary_epochs(n_rows, iterations=BINARY_ITERATIONS, minimum=5):
    """Epoch count for the binary model: ``iterations / n_rows``, at least ``minimum``."""
    return max(minimum, int(round(iterations / max(1, n_rows))))


def binarize(K, users, items):
    """Dense 0/1 cells over ``users x items``: 1 where ``K`` holds a rating.

    Returns ``(user_index, item_index, values)`` arrays in row-major order.
    """
    users, items = list(users), list(items)
    col = {item: n for n, item in enumerate(items)}
    values = np.zeros((len(users), len(items)))
    for n, u in enumerate(users):
        for item in K.row(u):
            if item in col:
                values[n, col[item]] = 1.0
    uu, ii = np.meshgrid(np.arange(len(users)), np.arange(len(items)), indexing="ij")
    return uu.ravel(), ii.ravel(), values.ravel()


def train_binary(K, users, items, config=None):
    """Factor model of the likelihood that a user rates an item."""
    users, items = sorted(users), sorted(items)
    if config is None:
        config = BINARY_TRAIN.replace(epochs=binary_epochs(len(users)))
    uu, ii, values = binarize(K, users, items)
    return recsys.train_arrays(users, items, uu, ii, values, config)


def binary(user, bmodel, pool):
    pool = sorted(pool)
    return order_by_score(user, pool, recsys.predict_many(bmodel, user, pool) if pool else [])


STRATEGY_NAMES = ("max_rating", "min_rating", "min_norm", "iknn", "binary", "non_myopic")
