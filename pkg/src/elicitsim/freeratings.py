"""Free ratings: copy an elicited rating onto the most similar unrated item.

Items are compared by cosine similarity of a vector that concatenates the
binary side-information features with, optionally, the item's learned
embedding from the base recommender.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

# similarities closer than this are ties (equal cosines can differ in the last bit)
TIE_TOLERANCE = 1e-12

OFF = "off"
FEATURES = "features_only"
FEATURES_EMBEDDINGS = "features_plus_embeddings"

_MODE_ALIASES = {
    "off": OFF, "none": OFF, None: OFF,
    "features": FEATURES, "features_only": FEATURES,
    "features+embeddings": FEATURES_EMBEDDINGS, "features_plus_embeddings": FEATURES_EMBEDDINGS,
}


def normalize_mode(mode):
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown free-rating mode {mode!r}") from None


@dataclass
class FreeRatingEvent:
    user: object
    source: object
    target: object
    rating: int
    similarity: float
    iteration: int = 0
    status: str = "applied"


def _unit_rows(matrix):
    matrix = sp.csr_matrix(matrix, dtype=np.float64)
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sp.diags(scale) @ matrix


class ItemVectors:
    """Per-item vectors for one round, indexed by ascending item id.

    Behaves as a read-only mapping ``item -> dense vector``.
    """

    def __init__(self, items, matrix):
        self.items = list(items)
        self.index = {item: n for n, item in enumerate(self.items)}
        self.matrix = sp.csr_matrix(matrix, dtype=np.float64)
        self._unit = _unit_rows(self.matrix).tocsr()
        self._sims = {}

    def __getitem__(self, item):
        return self.matrix[self.index[item]].toarray().ravel()

    def __contains__(self, item):
        return item in self.index

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    @property
    def dim(self):
        return self.matrix.shape[1]

    def is_zero(self, item):
        return self._unit[self.index[item]].nnz == 0

    def similarities(self, item):
        """Cosine similarity of ``item`` against every item, in ``self.items`` order."""
        n = self.index[item]
        if n not in self._sims:
            self._sims[n] = np.asarray((self._unit @ self._unit[n].T).todense()).ravel()
        return self._sims[n]


def build_vectors(features, model=None, mode=FEATURES, items=None, block_norm=True):
    """Item vectors for the given free-rating ``mode``.

    ``items`` defaults to the items of ``features``; items without features
    get a zero feature block and items unknown to ``model`` a zero embedding
    block. With ``block_norm`` each block is scaled to unit length before
    concatenation so neither block dominates the cosine.
    """
    mode = normalize_mode(mode)
    if mode == OFF:
        return ItemVectors([], sp.csr_matrix((0, 0)))
    if mode == FEATURES_EMBEDDINGS and model is None:
        raise ValueError("features_plus_embeddings mode needs a trained model")
    items = sorted(features.item_ids if items is None else items)

    rows = [features.row_index(i) if i in features else -1 for i in items]
    missing = sum(1 for r in rows if r < 0)
    if missing:
        log.warning("%d items have no feature vector; using zero features", missing)
    pick = sp.csr_matrix((np.ones(len(items) - missing),
                          ([n for n, r in enumerate(rows) if r >= 0], [r for r in rows if r >= 0])),
                         shape=(len(items), len(features)))
    block = pick @ features.matrix
    if block_norm:
        block = _unit_rows(block)
    blocks = [block]

    if mode == FEATURES_EMBEDDINGS:
        emb = np.zeros((len(items), model.d))
        for n, item in enumerate(items):
            k = model.item_index(item)
            if k is not None:
                emb[n] = model.item_factors[k]
        if block_norm:
            norms = np.linalg.norm(emb, axis=1)
            emb = np.divide(emb, norms[:, None], out=np.zeros_like(emb), where=norms[:, None] > 0)
        blocks.append(sp.csr_matrix(emb))
    return ItemVectors(items, sp.hstack(blocks, format="csr"))


def cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def _best(sims):
    """Index of the largest similarity; near-equal values resolve to the first."""
    top = np.max(sims)
    return int(np.flatnonzero(sims >= top - TIE_TOLERANCE)[0])


def most_similar(item, vectors, candidates, n=1):
    """Best ``n`` candidates by cosine similarity to ``item``.

    Returns ``(candidate, similarity)`` for ``n=1`` (``None`` if there are no
    candidates), otherwise a list of pairs. Ties resolve to the smaller id.
    """
    cands = sorted(c for c in candidates if c != item and c in vectors.index)
    if not cands:
        return None if n == 1 else []
    if vectors.is_zero(item):
        log.warning("item %r has a zero vector; free-rating target is arbitrary", item)
    sims = vectors.similarities(item)[[vectors.index[c] for c in cands]].copy()
    best = []
    for _ in range(min(n, len(cands))):
        k = _best(sims)
        best.append((cands[k], float(sims[k])))
        sims[k] = -np.inf
    return best[0] if n == 1 else best


def infer_free_ratings(user, elicited, vectors, K, per_item_budget=1, exclude=()):
    """Free-rating events for the items ``user`` rated this round.

    ``elicited`` is a list of ``(item, rating)``. Candidates for each source
    item exclude the source, everything already in ``K`` for the user, every
    item elicited or free-rated for the user this round and ``exclude``.
    """
    if per_item_budget < 0:
        raise ValueError("per_item_budget must be >= 0")
    if per_item_budget == 0 or not elicited:
        return []
    available = np.ones(len(vectors), dtype=bool)
    for item in set(K.row(user)) | {i for i, _ in elicited} | set(exclude):
        n = vectors.index.get(item)
        if n is not None:
            available[n] = False
    events = []
    for item, rating in elicited:
        if item not in vectors.index:
            continue
        if vectors.is_zero(item):
            log.warning("item %r has a zero vector; free-rating target is arbitrary", item)
        sims = np.where(available, vectors.similarities(item), -np.inf)
        for _ in range(per_item_budget):
            if not np.isfinite(sims).any():
                break
            n = _best(sims)  # smallest id among ties
            events.append(FreeRatingEvent(user, item, vectors.items[n], rating, float(sims[n])))
            available[n] = False
            sims[n] = -np.inf
    return events
