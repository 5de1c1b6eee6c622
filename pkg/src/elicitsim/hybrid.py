"""Adaptive blend of a non-personalized and a personalized ranking.

Early rounds lean on the non-personalized ranking, when little is known
about each user; the weight on it decays as ``exp(-alpha * round)``.
"""

import math
from dataclasses import dataclass

from .errors import ParameterError
from .personalized import combine_ranks, order_by_score


@dataclass(frozen=True)
class HybridConfig:
    alpha: float = 2.0
    np_strategy: str = "pop_entropy"
    p_strategy: str = "binary"
    np_shortlist_size: int | None = None
    weight: float | None = None  # fixed blend weight instead of the decay schedule

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        if self.np_shortlist_size is not None and self.np_shortlist_size < 1:
            raise ParameterError("np_shortlist_size must be >= 1")
        if self.weight is not None and not 0.0 <= self.weight <= 1.0:
            raise ParameterError("weight must lie in [0, 1]")


def hybrid_weight(iteration, alpha=2.0):
    """Weight on the non-personalized ranking in round ``iteration`` (1-based)."""
    if iteration < 1:
        raise ParameterError("iteration must be >= 1")
    return math.exp(-alpha * iteration)


def np_user_ranking(user, scores, pool):
    """Order ``pool`` by shared non-personalized ``scores``, best first."""
    pool = sorted(pool)
    return order_by_score(user, pool, [scores.get(i, 0.0) for i in pool])


def shortlist_ranks(ranking, shortlist):
    """Rank map where non-shortlisted items share the rank after the shortlist."""
    ranks = {}
    inside = [i for i in ranking.items if i in shortlist]
    for n, item in enumerate(inside, start=1):
        ranks[item] = n
    for item in ranking.items:
        ranks.setdefault(item, len(inside) + 1)
    return ranks


def hybrid_rank(user, np_ranking, p_ranking, iteration=None, alpha=2.0, weight=None, shortlist=None):
    """Blend ``np_ranking`` and ``p_ranking`` for one user.

    The blended score of an item is ``w * np_rank + (1 - w) * p_rank`` and the
    result sorts it ascending. ``w`` is :func:`hybrid_weight` of ``iteration``
    unless ``weight`` is given explicitly.
    """
    if weight is None:
        if iteration is None:
            raise ParameterError("either iteration or weight is required")
        weight = hybrid_weight(iteration, alpha)
    np_ranks = np_ranking.ranks() if shortlist is None else shortlist_ranks(np_ranking, shortlist)
    return combine_ranks(user, np_ranks, p_ranking.ranks(), weight)
