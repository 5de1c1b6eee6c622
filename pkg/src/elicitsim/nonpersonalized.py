"""Non-personalized item scorers computed from the known ratings.

Every scorer returns ``{item: score}`` over the candidate pool, higher is
elicited sooner, and the same scores are shared by all users. Logs are
natural. Items nobody has rated score 0.
"""

import math

import numpy as np

from .dataset import MAX_RATING


class ItemStats:
    """Per-item rating statistics over a candidate pool, snapshotted from ``K``."""

    def __init__(self, K, pool=None, total_users=None, max_rating=MAX_RATING):
        self.items = sorted(K.items if pool is None else pool)
        self.max_rating = max_rating
        self.total_users = len(K.users) if total_users is None else total_users
        self._K = K
        self.counts = np.zeros(len(self.items), dtype=np.int64)
        self.histogram = np.zeros((len(self.items), max_rating), dtype=np.int64)
        self.co_coverage = np.zeros(len(self.items), dtype=np.int64)
        for n, item in enumerate(self.items):
            column = K.column(item)
            self.counts[n] = len(column)
            for user, rating in column.items():
                self.histogram[n, int(rating) - 1] += 1
                # every other item this user rated shares this rater with ``item``
                self.co_coverage[n] += len(K.row(user)) - 1
        values = np.arange(1, max_rating + 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            self.means = np.where(self.counts > 0,
                                  self.histogram @ values / np.maximum(self.counts, 1), 0.0)

    def __len__(self):
        return len(self.items)

    def co_rating(self, i, j):
        """Number of users who rated both ``i`` and ``j``."""
        a, b = self._K.column(i), self._K.column(j)
        if len(a) > len(b):
            a, b = b, a
        return sum(1 for u in a if u in b)

    def _scores(self, values):
        return {item: float(v) for item, v in zip(self.items, values)}


def _entropy(hist, total):
    p = hist[hist > 0] / total
    return float(-(p * np.log(p)).sum()) + 0.0  # turn -0.0 into 0.0


def _entropies(stats):
    return np.array([_entropy(h, c) if c > 0 else 0.0 for h, c in zip(stats.histogram, stats.counts)])


def _variances(stats):
    var = np.array([
        float(((np.arange(1, stats.max_rating + 1) - m) ** 2 * h).sum() / c) if c > 0 else 0.0
        for h, c, m in zip(stats.histogram, stats.counts, stats.means)
    ])
    return var


def _log_pop(stats):
    return np.log(np.maximum(stats.counts, 1))


def variance(stats):
    return stats._scores(_variances(stats))


def entropy(stats):
    return stats._scores(_entropies(stats))


def entropy0(stats, total_users=None):
    """Entropy with missing ratings counted as a rating value of 0 over all users."""
    n_users = stats.total_users if total_users is None else total_users
    scores = []
    for hist, count in zip(stats.histogram, stats.counts):
        if n_users <= 0:
            scores.append(0.0)
            continue
        full = np.concatenate([[max(n_users - count, 0)], hist])
        scores.append(_entropy(full, full.sum()))
    return stats._scores(scores)


def co_coverage(stats):
    return stats._scores(stats.co_coverage)


def popularity(stats):
    return stats._scores(stats.counts)


def pop_entropy(stats):
    return stats._scores(_log_pop(stats) * _entropies(stats))


def pop_variance(stats):
    return stats._scores(np.sqrt(stats.counts) * _variances(stats))


def helf(stats, total_users=None, max_rating=None, classic=False):
    """Harmonic blend of log-popularity and entropy.

    The default evaluates

        2 log(pop) Ent / (log|U| log(maxR) (log(pop) + Ent / log(maxR)))

    term for term. ``classic=True`` instead takes the harmonic mean of
    ``log(pop)/log|U|`` and ``Ent/log(maxR)``. A zero denominator scores 0.
    """
    n_users = stats.total_users if total_users is None else total_users
    max_r = stats.max_rating if max_rating is None else max_rating
    log_u = math.log(n_users) if n_users > 0 else 0.0
    log_r = math.log(max_r)
    scores = []
    for lp, ent in zip(_log_pop(stats), _entropies(stats)):
        if classic:
            a = lp / log_u if log_u else 0.0
            b = ent / log_r
            num, den = 2 * a * b, a + b
        else:
            num = 2 * lp * ent
            den = log_u * log_r * (lp + ent / log_r)
        scores.append(num / den if den else 0.0)
    return stats._scores(scores)


def random_score(pool, seed=0):
    rng = np.random.default_rng(seed)
    items = sorted(pool)
    return {item: float(v) for item, v in zip(items, rng.random(len(items)))}


SCORERS = {
    "variance": variance,
    "entropy": entropy,
    "entropy0": entropy0,
    "co_coverage": co_coverage,
    "popularity": popularity,
    "pop_entropy": pop_entropy,
    "pop_variance": pop_variance,
    "helf": helf,
}


def score(name, stats, seed=0, helf_classic=False):
    """Dispatch a scorer by its strategy name (``random`` uses ``seed``)."""
    if name == "random":
        return random_score(stats.items, seed)
    if name == "helf":
        return helf(stats, classic=helf_classic)
    if name == "helf_classic":
        return helf(stats, classic=True)
    try:
        return SCORERS[name](stats)
    except KeyError:
        raise KeyError(f"unknown non-personalized strategy {name!r}") from None


STRATEGY_NAMES = tuple(SCORERS) + ("random", "helf_classic")
