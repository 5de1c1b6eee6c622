"""Rating data: loading, density filtering and the known/elicitable/test split.

The offline protocol keeps three disjoint rating matrices per run:

* ``K`` -- ratings the recommender is trained on (grows every round),
* ``X`` -- ratings users would give if asked (the elicitation pool),
* ``T`` -- held-out ratings used only for evaluation.
"""

import csv
import logging
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import FilterError, ParseError, SplitError, ValidationError

log = logging.getLogger(__name__)

MAX_RATING = 5

# Block order of the feature vocabulary; unknown kinds follow alphabetically.
FEATURE_KINDS = ("genre", "actor")


class RatingTriple(NamedTuple):
    user: object
    item: object
    rating: int


def _parse_id(token):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        return token


def _check_rating(value, line_number, max_rating=MAX_RATING):
    try:
        number = float(value)
    except ValueError:
        raise ParseError(f"rating {value!r} is not a number", line_number) from None
    if number != int(number) or not 1 <= number <= max_rating:
        raise ValidationError(f"line {line_number}: rating {value!r} outside 1..{max_rating}")
    return int(number)


def load_ratings(path, format="movielens_1m", max_rating=MAX_RATING):
    """Read rating triples from ``path``.

    ``movielens_1m`` expects ``UserID::MovieID::Rating::Timestamp`` lines;
    ``csv`` expects ``user,item,rating`` with an optional header row and
    optional trailing columns. Timestamps and extra columns are dropped.
    """
    if format == "movielens_1m":
        return _load_movielens(path, max_rating)
    if format == "csv":
        return _load_csv(path, max_rating)
    raise ValueError(f"unknown ratings format {format!r}")


def _load_movielens(path, max_rating):
    triples = []
    with open(path, encoding="latin-1") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split("::")
            if len(fields) < 3:
                raise ParseError(f"expected 'user::item::rating::timestamp', got {line!r}", number)
            triples.append(RatingTriple(_parse_id(fields[0]), _parse_id(fields[1]),
                                        _check_rating(fields[2], number, max_rating)))
    return triples


def _load_csv(path, max_rating):
    triples = []
    with open(path, newline="", encoding="utf-8") as fh:
        for number, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) < 3:
                raise ParseError(f"expected 'user,item,rating', got {row!r}", number)
            if number == 1 and not _is_number(row[2]):
                continue  # header
            triples.append(RatingTriple(_parse_id(row[0]), _parse_id(row[1]),
                                        _check_rating(row[2], number, max_rating)))
    return triples


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


class SparseRatingMatrix:
    """User-major sparse rating matrix with a derived item-major view.

    Rows map ``user -> {item: rating}`` and columns ``item -> {user: rating}``;
    both views are kept in sync by every mutating method.
    """

    def __init__(self, triples=()):
        self._rows = {}
        self._cols = {}
        self._size = 0
        for user, item, rating in triples:
            self.add(user, item, rating)

    @classmethod
    def from_rows(cls, rows):
        return cls((u, i, r) for u, items in rows.items() for i, r in items.items())

    def add(self, user, item, rating, overwrite=False):
        row = self._rows.setdefault(user, {})
        if item in row:
            if not overwrite:
                raise ValueError(f"duplicate rating for user {user!r}, item {item!r}")
        else:
            self._size += 1
        row[item] = rating
        self._cols.setdefault(item, {})[user] = rating

    def remove(self, user, item):
        rating = self._rows[user].pop(item)
        del self._cols[item][user]
        if not self._cols[item]:
            del self._cols[item]
        if not self._rows[user]:
            del self._rows[user]
        self._size -= 1
        return rating

    def get(self, user, item, default=None):
        return self._rows.get(user, {}).get(item, default)

    def __contains__(self, pair):
        user, item = pair
        return item in self._rows.get(user, ())

    def __len__(self):
        return self._size

    def __eq__(self, other):
        if not isinstance(other, SparseRatingMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __repr__(self):
        return f"SparseRatingMatrix(users={len(self._rows)}, items={len(self._cols)}, ratings={self._size})"

    def row(self, user):
        """Ratings of ``user`` as an ``{item: rating}`` dict (empty if unknown)."""
        return self._rows.get(user, {})

    def column(self, item):
        return self._cols.get(item, {})

    @property
    def users(self):
        return sorted(self._rows)

    @property
    def items(self):
        return sorted(self._cols)

    def triples(self):
        """All ratings as triples, sorted by user then item."""
        return [RatingTriple(u, i, self._rows[u][i])
                for u in sorted(self._rows) for i in sorted(self._rows[u])]

    def copy(self):
        new = SparseRatingMatrix()
        new._rows = {u: dict(r) for u, r in self._rows.items()}
        new._cols = {i: dict(c) for i, c in self._cols.items()}
        new._size = self._size
        return new


@dataclass(frozen=True)
class DatasetSplit:
    K: SparseRatingMatrix
    X: SparseRatingMatrix
    T: SparseRatingMatrix

    @property
    def users(self):
        return sorted(set(self.K.users) | set(self.X.users) | set(self.T.users))

    @property
    def items(self):
        return sorted(set(self.K.items) | set(self.X.items) | set(self.T.items))

    def __len__(self):
        return len(self.K) + len(self.X) + len(self.T)


class ItemFeatureMatrix:
    """Binary side-information vectors over a shared token vocabulary.

    ``matrix`` is a CSR matrix with one row per entry of ``item_ids`` and one
    column per entry of ``vocabulary``; ``blocks`` records the column range
    of each token kind (genres first, then actors).
    """

    def __init__(self, item_ids, vocabulary, matrix, blocks):
        self.item_ids = list(item_ids)
        self.vocabulary = list(vocabulary)
        self.matrix = sp.csr_matrix(matrix, dtype=np.float64)
        self.blocks = dict(blocks)
        self._row_of = {item: n for n, item in enumerate(self.item_ids)}

    @classmethod
    def from_tokens(cls, item_tokens):
        """Build from ``{item: iterable of tokens}``.

        Tokens are ``kind:value`` (e.g. ``genre:Comedy``, ``actor:Tom Hanks``);
        an untagged token counts as a genre.
        """
        tagged = {item: sorted({_tag(t) for t in tokens}) for item, tokens in item_tokens.items()}
        kinds = sorted({k for toks in tagged.values() for k, _ in toks},
                       key=lambda k: (FEATURE_KINDS.index(k) if k in FEATURE_KINDS else len(FEATURE_KINDS), k))
        vocabulary, blocks = [], {}
        for kind in kinds:
            values = sorted({v for toks in tagged.values() for k, v in toks if k == kind})
            blocks[kind] = (len(vocabulary), len(vocabulary) + len(values))
            vocabulary.extend(f"{kind}:{v}" for v in values)
        column = {tok: n for n, tok in enumerate(vocabulary)}

        item_ids = sorted(tagged)
        indptr, indices = [0], []
        for item in item_ids:
            cols = sorted(column[f"{k}:{v}"] for k, v in tagged[item])
            if not cols:
                log.warning("item %r has no feature tokens; using a zero vector", item)
            indices.extend(cols)
            indptr.append(len(indices))
        data = np.ones(len(indices))
        matrix = sp.csr_matrix((data, indices, indptr), shape=(len(item_ids), len(vocabulary)))
        return cls(item_ids, vocabulary, matrix, blocks)

    @property
    def dim(self):
        return len(self.vocabulary)

    def __contains__(self, item):
        return item in self._row_of

    def __len__(self):
        return len(self.item_ids)

    def row_index(self, item):
        try:
            return self._row_of[item]
        except KeyError:
            raise KeyError(f"item {item!r} has no feature vector") from None

    def vector(self, item):
        """Dense 0/1 vector for ``item``."""
        return self.matrix[self.row_index(item)].toarray().ravel()

    def block_count(self, item, kind):
        start, stop = self.blocks.get(kind, (0, 0))
        return int(self.vector(item)[start:stop].sum())


def _tag(token):
    token = token.strip()
    kind, sep, value = token.partition(":")
    if sep and kind in FEATURE_KINDS:
        return kind, value.strip()
    return "genre", token


def load_item_features(path):
    """Read a feature file of ``item_id<TAB>token,token,...`` lines.

    A ``movies.dat`` file (``MovieID::Title::Genre|Genre``) is recognised by
    its ``::`` separator and yields genre-only vectors.
    """
    item_tokens = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "::" in line and "\t" not in line:
                fields = line.split("::")
                if len(fields) < 3:
                    raise ParseError(f"expected 'id::title::genres', got {line!r}", number)
                tokens = [f"genre:{g}" for g in fields[-1].split("|") if g.strip()]
            else:
                item, sep, rest = line.partition("\t")
                if not sep:
                    raise ParseError(f"expected 'item_id<TAB>tokens', got {line!r}", number)
                fields = [item]
                tokens = [t for t in rest.split(",") if t.strip()]
            item = _parse_id(fields[0])
            item_tokens.setdefault(item, []).extend(tokens)
    return ItemFeatureMatrix.from_tokens(item_tokens)


def write_item_features(features, path):
    with open(path, "w", encoding="utf-8") as fh:
        for n, item in enumerate(features.item_ids):
            cols = features.matrix[n].indices
            fh.write(f"{item}\t{','.join(features.vocabulary[c] for c in sorted(cols))}\n")


def filter_dense(ratings, min_count):
    """Drop users and items with fewer than ``min_count`` ratings, to a fixpoint.

    Removing sparse users can push items under the threshold and vice versa,
    so both passes repeat until neither removes anything.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    kept = list(ratings)
    while True:
        users = Counter(t.user for t in kept)
        kept_users = [t for t in kept if users[t.user] >= min_count]
        items = Counter(t.item for t in kept_users)
        kept_items = [t for t in kept_users if items[t.item] >= min_count]
        if len(kept_items) == len(kept):
            break
        kept = kept_items
    if not kept and ratings:
        raise FilterError(f"filter removed everything (min_count={min_count})")
    return kept


def split(ratings, k_per_user=1, t_per_user=30, seed=0):
    """Partition each user's ratings uniformly at random into K, T and X.

    Users are visited in ascending id order and each user's ratings are
    shuffled from ascending item order, so the result depends only on the
    rating set, the sizes and ``seed``.
    """
    if k_per_user < 0 or t_per_user < 0:
        raise ValueError("k_per_user and t_per_user must be non-negative")
    by_user = {}
    for t in ratings:
        by_user.setdefault(t.user, {})[t.item] = t.rating
    rng = np.random.default_rng(seed)
    K, X, T = SparseRatingMatrix(), SparseRatingMatrix(), SparseRatingMatrix()
    for user in sorted(by_user):
        row = by_user[user]
        if len(row) <= k_per_user + t_per_user:
            raise SplitError(f"user {user!r} has {len(row)} ratings; "
                             f"need more than {k_per_user + t_per_user}")
        items = sorted(row)
        order = rng.permutation(len(items))
        for rank, n in enumerate(order):
            item = items[n]
            target = K if rank < k_per_user else T if rank < k_per_user + t_per_user else X
            target.add(user, item, row[item])
    return DatasetSplit(K, X, T)


def subsample_users(ratings, n_users, seed=0):
    """Keep the ratings of ``n_users`` users drawn without replacement."""
    users = sorted({t.user for t in ratings})
    if n_users >= len(users):
        return list(ratings)
    rng = np.random.default_rng(seed)
    chosen = {users[n] for n in rng.choice(len(users), size=n_users, replace=False)}
    return [t for t in ratings if t.user in chosen]


def synthetic_ratings(n_users=50, n_items=200, rank=3, density=0.3, noise=0.3, seed=0,
                      popularity_skew=1.0, min_per_user=None):
    """Ratings from a planted low-rank model with popularity-skewed observations.

    Scores are ``3 + b_u + b_i + p_u . q_i + noise``, rounded and clipped to
    1..5. Each user rates a ``density`` fraction of the items, drawn with
    probability proportional to an item popularity weight. Returns the
    triples and the planted item factors (useful for building features).
    """
    rng = np.random.default_rng(seed)
    P = rng.normal(0, 0.8, (n_users, rank))
    Q = rng.normal(0, 0.8, (n_items, rank))
    bu = rng.normal(0, 0.4, n_users)
    bi = rng.normal(0, 0.5, n_items)
    scores = 3 + bu[:, None] + bi[None, :] + P @ Q.T + rng.normal(0, noise, (n_users, n_items))
    values = np.clip(np.rint(scores), 1, MAX_RATING).astype(int)

    weights = rng.pareto(2.0, n_items) + 1.0
    weights = weights ** popularity_skew
    weights /= weights.sum()
    per_user = max(1, int(round(density * n_items)))
    if min_per_user is not None:
        per_user = max(per_user, min_per_user)
    per_user = min(per_user, n_items)

    triples = []
    for u in range(n_users):
        rated = rng.choice(n_items, size=per_user, replace=False, p=weights)
        for i in sorted(rated):
            triples.append(RatingTriple(u, int(i), int(values[u, i])))
    return triples, Q


def synthetic_features(item_factors, n_genres=6, n_actors=40, actors_per_item=3, seed=0):
    """Genre/actor tokens correlated with planted item factors.

    Each item's genre is the sign pattern bucket of its strongest factors
    and it draws actors mostly from a pool tied to that genre.
    """
    rng = np.random.default_rng(seed)
    n_items, rank = item_factors.shape
    centers = rng.normal(0, 1, (n_genres, rank))
    genre = np.argmax(item_factors @ centers.T, axis=1)
    tokens = {}
    for i in range(n_items):
        toks = [f"genre:g{genre[i]:02d}"]
        if rng.random() < 0.3:
            toks.append(f"genre:g{rng.integers(n_genres):02d}")
        for _ in range(actors_per_item):
            if rng.random() < 0.8:
                actor = genre[i] * (n_actors // n_genres) + rng.integers(n_actors // n_genres)
            else:
                actor = rng.integers(n_actors)
            toks.append(f"actor:a{actor:03d}")
        tokens[i] = toks
    return ItemFeatureMatrix.from_tokens(tokens)
