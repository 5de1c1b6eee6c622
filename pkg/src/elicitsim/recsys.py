"""Biased matrix factorization trained by stochastic gradient descent.

Prediction is ``mu + b_u + b_i + <p_u, q_i>``. Training minimises

    sum over (u, i, r) of (r - r_hat)^2 + reg * (|p_u|^2 + |q_i|^2 + b_u^2 + b_i^2)

with one SGD step per observed rating; ``mu`` is the training mean and is
not learned.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import TrainingDiverged

MODEL_HEADER = "elicitsim-factor-model v1"


@dataclass(frozen=True)
class TrainConfig:
    d: int = 50
    learning_rate: float = 0.005
    regularization: float = 0.02
    epochs: int = 20
    seed: int = 0
    clamp: bool = True
    init_std: float = 0.1
    max_rating: float = 5.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.regularization < 0:
            raise ValueError("regularization must be non-negative")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class FactorModel:
    user_ids: tuple
    item_ids: tuple
    user_factors: np.ndarray
    item_factors: np.ndarray
    user_bias: np.ndarray
    item_bias: np.ndarray
    global_mean: float
    clamp: bool = True
    max_rating: float = 5.0
    loss_history: tuple = ()
    _user_index: dict = field(init=False, repr=False)
    _item_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_user_index", {u: n for n, u in enumerate(self.user_ids)})
        object.__setattr__(self, "_item_index", {i: n for n, i in enumerate(self.item_ids)})
        for name in ("user_factors", "item_factors", "user_bias", "item_bias"):
            getattr(self, name).flags.writeable = False

    @property
    def d(self):
        return self.item_factors.shape[1]

    def user_index(self, user):
        return self._user_index.get(user)

    def item_index(self, item):
        return self._item_index.get(item)

    def same_parameters(self, other):
        """True when every parameter array is bitwise identical."""
        return (self.user_ids == other.user_ids and self.item_ids == other.item_ids
                and self.global_mean == other.global_mean
                and all(np.array_equal(getattr(self, n), getattr(other, n))
                        for n in ("user_factors", "item_factors", "user_bias", "item_bias")))


@njit(cache=True)
def _sgd_epoch(users, items, values, order, mu, bu, bi, P, Q, lr, reg):
    d = P.shape[1]
    for n in order:
        u = users[n]
        i = items[n]
        dot = 0.0
        for f in range(d):
            dot += P[u, f] * Q[i, f]
        err = values[n] - (mu + bu[u] + bi[i] + dot)
        bu[u] += lr * (err - reg * bu[u])
        bi[i] += lr * (err - reg * bi[i])
        for f in range(d):
            puf = P[u, f]
            qif = Q[i, f]
            P[u, f] += lr * (err * qif - reg * puf)
            Q[i, f] += lr * (err * puf - reg * qif)


@njit(cache=True)
def _objective(users, items, values, mu, bu, bi, P, Q, reg):
    d = P.shape[1]
    total = 0.0
    for n in range(users.shape[0]):
        u = users[n]
        i = items[n]
        dot = 0.0
        norm = bu[u] * bu[u] + bi[i] * bi[i]
        for f in range(d):
            dot += P[u, f] * Q[i, f]
            norm += P[u, f] * P[u, f] + Q[i, f] * Q[i, f]
        err = values[n] - (mu + bu[u] + bi[i] + dot)
        total += err * err + reg * norm
    return total


def _index_triples(triples):
    user_ids = tuple(sorted({t[0] for t in triples}))
    item_ids = tuple(sorted({t[1] for t in triples}))
    uidx = {u: n for n, u in enumerate(user_ids)}
    iidx = {i: n for n, i in enumerate(item_ids)}
    users = np.array([uidx[t[0]] for t in triples], dtype=np.int64)
    items = np.array([iidx[t[1]] for t in triples], dtype=np.int64)
    values = np.array([t[2] for t in triples], dtype=np.float64)
    return user_ids, item_ids, users, items, values


def train(matrix, config=TrainConfig()):
    """Fit a factor model to the ratings in ``matrix``.

    ``matrix`` is a :class:`~elicitsim.dataset.SparseRatingMatrix` or any
    sequence of ``(user, item, value)`` triples.
    """
    triples = matrix.triples() if hasattr(matrix, "triples") else list(matrix)
    if not triples:
        raise ValueError("cannot train on an empty matrix")
    user_ids, item_ids, users, items, values = _index_triples(triples)
    return train_arrays(user_ids, item_ids, users, items, values, config)


def train_arrays(user_ids, item_ids, users, items, values, config=TrainConfig()):
    """Fit on pre-indexed arrays; ``users[n]``/``items[n]`` index ``user_ids``/``item_ids``."""
    if len(values) == 0:
        raise ValueError("cannot train on an empty matrix")
    rng = np.random.default_rng(config.seed)
    P = rng.normal(0.0, config.init_std, (len(user_ids), config.d))
    Q = rng.normal(0.0, config.init_std, (len(item_ids), config.d))
    bu = np.zeros(len(user_ids))
    bi = np.zeros(len(item_ids))
    users = np.ascontiguousarray(users, dtype=np.int64)
    items = np.ascontiguousarray(items, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    mu = float(values.mean())
    lr, reg = float(config.learning_rate), float(config.regularization)

    losses = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(values))
        _sgd_epoch(users, items, values, order, mu, bu, bi, P, Q, lr, reg)
        loss = _objective(users, items, values, mu, bu, bi, P, Q, reg)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch)
        losses.append(loss)

    return FactorModel(tuple(user_ids), tuple(item_ids), P, Q, bu, bi, mu,
                       clamp=config.clamp, max_rating=config.max_rating,
                       loss_history=tuple(losses))


def objective(model, triples, regularization):
    """Regularized squared loss of ``model`` over ``triples``."""
    _, _, users, items, values = _model_arrays(model, triples)
    return _objective(users, items, values, model.global_mean, model.user_bias,
                      model.item_bias, model.user_factors, model.item_factors,
                      float(regularization))


def objective_gradient(model, triples, regularization):
    """Analytic gradient of :func:`objective` w.r.t. every parameter block.

    Returns a dict keyed like the model fields. The SGD step for a single
    rating moves each parameter by ``-learning_rate / 2`` times that
    rating's term of this gradient.
    """
    _, _, users, items, values = _model_arrays(model, triples)
    P, Q = model.user_factors, model.item_factors
    bu, bi = model.user_bias, model.item_bias
    reg = regularization
    grads = {"user_factors": np.zeros_like(P), "item_factors": np.zeros_like(Q),
             "user_bias": np.zeros_like(bu), "item_bias": np.zeros_like(bi)}
    for u, i, r in zip(users, items, values):
        err = r - (model.global_mean + bu[u] + bi[i] + P[u] @ Q[i])
        grads["user_bias"][u] += -2 * err + 2 * reg * bu[u]
        grads["item_bias"][i] += -2 * err + 2 * reg * bi[i]
        grads["user_factors"][u] += -2 * err * Q[i] + 2 * reg * P[u]
        grads["item_factors"][i] += -2 * err * P[u] + 2 * reg * Q[i]
    return grads


def _model_arrays(model, triples):
    users = np.array([model.user_index(t[0]) for t in triples], dtype=np.int64)
    items = np.array([model.item_index(t[1]) for t in triples], dtype=np.int64)
    values = np.array([t[2] for t in triples], dtype=np.float64)
    return model.user_ids, model.item_ids, users, items, values


def sgd_step(model, user, item, value, learning_rate, regularization):
    """Copy of ``model`` after one SGD update on a single rating."""
    P = model.user_factors.copy()
    Q = model.item_factors.copy()
    bu = model.user_bias.copy()
    bi = model.item_bias.copy()
    u, i = model.user_index(user), model.item_index(item)
    _sgd_epoch(np.array([u]), np.array([i]), np.array([float(value)]), np.array([0]),
               model.global_mean, bu, bi, P, Q, float(learning_rate), float(regularization))
    return dataclasses.replace(model, user_factors=P, item_factors=Q, user_bias=bu, item_bias=bi)


def _clip(model, value):
    if model.clamp:
        return np.clip(value, 1.0, model.max_rating)
    return value


def predict(model, user, item):
    """Rating estimate for ``(user, item)``.

    Unknown users or items fall back to the global mean plus whichever bias
    is known; this never raises.
    """
    u, i = model.user_index(user), model.item_index(item)
    value = model.global_mean
    if u is not None:
        value += model.user_bias[u]
    if i is not None:
        value += model.item_bias[i]
    if u is not None and i is not None:
        value += float(model.user_factors[u] @ model.item_factors[i])
    return float(_clip(model, value))


def predict_many(model, user, items):
    """Vectorised :func:`predict` for one user over a sequence of items."""
    items = list(items)
    u = model.user_index(user)
    idx = np.array([model.item_index(i) if model.item_index(i) is not None else -1 for i in items],
                   dtype=np.int64)
    known = idx >= 0
    values = np.full(len(items), model.global_mean)
    values[known] += model.item_bias[idx[known]]
    if u is not None:
        values += model.user_bias[u]
        values[known] += model.item_factors[idx[known]] @ model.user_factors[u]
    return _clip(model, values)


def item_embedding(model, item):
    i = model.item_index(item)
    if i is None:
        raise KeyError(f"item {item!r} is unknown to the model")
    return model.item_factors[i]


def item_latent_norm(model, item):
    return float(np.linalg.norm(item_embedding(model, item)))


def save_model(model, path):
    """Write a plain-text dump: header, dimensions, then row-major blocks."""
    with open(path, "w") as fh:
        fh.write(f"{MODEL_HEADER}\n")
        fh.write(f"{len(model.user_ids)} {len(model.item_ids)} {model.d}\n")
        fh.write(f"{model.global_mean!r} {int(model.clamp)} {model.max_rating!r}\n")
        fh.write("\t".join(map(str, model.user_ids)) + "\n")
        fh.write("\t".join(map(str, model.item_ids)) + "\n")
        for block in (model.user_bias, model.item_bias,
                      model.user_factors.ravel(), model.item_factors.ravel()):
            fh.write(" ".join(repr(float(x)) for x in block) + "\n")


def load_model(path):
    from .dataset import _parse_id

    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines[0] != MODEL_HEADER:
        raise ValueError(f"unrecognised model header {lines[0]!r}")
    n_users, n_items, d = map(int, lines[1].split())
    mean, clamp, max_rating = lines[2].split()
    user_ids = tuple(_parse_id(x) for x in lines[3].split("\t")) if n_users else ()
    item_ids = tuple(_parse_id(x) for x in lines[4].split("\t")) if n_items else ()
    blocks = [np.array(line.split(), dtype=np.float64) for line in lines[5:9]]
    return FactorModel(user_ids, item_ids, blocks[2].reshape(n_users, d),
                       blocks[3].reshape(n_items, d), blocks[0], blocks[1], float(mean),
                       clamp=bool(int(clamp)), max_rating=float(max_rating))
