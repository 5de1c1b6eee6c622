"""Offline elicitation rounds: rank, elicit, add free ratings, retrain, evaluate.

Each round works against the state at the start of the round: every user's
candidates are ranked with the same snapshot of ``K`` and the same models,
then all selections are committed in ascending user order, then free
ratings are inferred and applied, and finally the base model is retrained
and scored on ``T``.
"""

import csv
import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import freeratings, nonpersonalized, personalized, recsys
from .errors import EvaluationError, ParameterError
from .hybrid import HybridConfig, hybrid_rank, hybrid_weight, np_user_ranking
from .recsys import TrainConfig

log = logging.getLogger(__name__)

HYBRID = "adaptive_hybrid"
STRATEGIES = nonpersonalized.STRATEGY_NAMES + personalized.STRATEGY_NAMES + (HYBRID,)

REPORT_FIELDS = ("iter", "strategy", "mae", "elicited", "free", "seconds")
EVENT_FIELDS = ("iter", "user", "source", "target", "rating", "sim", "status")


@dataclass(frozen=True)
class SimulationConfig:
    strategy: str = HYBRID
    total_iter: int = 25
    batch_size: int = 10
    hybrid: HybridConfig = HybridConfig()
    free_mode: str = "off"
    free_budget: int = 1
    block_norm: bool = True
    train: TrainConfig = TrainConfig()
    binary_train: TrainConfig | None = None  # None: binary defaults, epochs from user count
    binary_iterations: int = personalized.BINARY_ITERATIONS
    iknn_k: int = personalized.IKNN_K
    helf_classic: bool = False
    master_seed: int = 0
    label: str | None = None

    def __post_init__(self):
        if self.total_iter < 0:
            raise ParameterError("total_iter must be >= 0")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        if self.strategy == HYBRID:
            for name, allowed in ((self.hybrid.np_strategy, nonpersonalized.STRATEGY_NAMES),
                                  (self.hybrid.p_strategy, personalized.STRATEGY_NAMES)):
                if name not in allowed:
                    raise ParameterError(f"strategy {name!r} cannot be used in the hybrid")
        object.__setattr__(self, "free_mode", freeratings.normalize_mode(self.free_mode))

    @property
    def name(self):
        if self.label:
            return self.label
        if self.free_mode != freeratings.OFF:
            return f"{self.strategy}+{self.free_mode}"
        return self.strategy

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class IterationReport:
    iteration: int
    elicited: int
    free: int
    mae: float
    seconds: float = 0.0


@dataclass
class SimulationResult:
    strategy: str
    reports: list
    events: list = field(default_factory=list)
    truncated: bool = False

    @property
    def maes(self):
        return [r.mae for r in self.reports]

    def __len__(self):
        return len(self.reports)


def mae(model, T):
    """Mean absolute error of ``model`` over every rating in ``T``."""
    if len(T) == 0:
        raise EvaluationError("cannot evaluate on an empty test matrix")
    total = 0.0
    for user in T.users:
        row = T.row(user)
        items = sorted(row)
        pred = recsys.predict_many(model, user, items)
        total += float(np.abs(np.array([row[i] for i in items], dtype=float) - pred).sum())
    return total / len(T)


class _Round:
    """Strategy context for one round, built lazily from the round-start state."""

    def __init__(self, config, iteration, K, X, users, items, model):
        self.config = config
        self.iteration = iteration
        self.K = K
        self.X = X
        self.users = users
        self.items = items
        self.model = model
        self._np_scores = {}
        self._bmodel = None
        self._similarity = None

    def np_scores(self, name):
        if name not in self._np_scores:
            stats = nonpersonalized.ItemStats(self.K, pool=self.X.items, total_users=len(self.users))
            self._np_scores[name] = nonpersonalized.score(
                name, stats, seed=self.config.master_seed + self.iteration,
                helf_classic=self.config.helf_classic)
        return self._np_scores[name]

    @property
    def bmodel(self):
        if self._bmodel is None:
            cfg = self.config.binary_train
            if cfg is None:
                cfg = personalized.BINARY_TRAIN.replace(
                    epochs=personalized.binary_epochs(len(self.users), self.config.binary_iterations))
            cfg = cfg.replace(seed=cfg.seed + self.config.master_seed + self.iteration)
            self._bmodel = personalized.train_binary(self.K, self.users, self.items, cfg)
        return self._bmodel

    @property
    def similarity(self):
        if self._similarity is None:
            self._similarity = personalized.ItemSimilarity(self.K)
        return self._similarity

    def personalized(self, name, user, pool):
        if name == "max_rating":
            return personalized.max_rating(user, self.model, pool)
        if name == "min_rating":
            return personalized.min_rating(user, self.model, pool)
        if name == "min_norm":
            return personalized.min_norm(user, self.model, pool)
        if name == "iknn":
            return personalized.iknn(user, self.K, pool, self.config.iknn_k, self.similarity)
        if name == "binary":
            return personalized.binary(user, self.bmodel, pool)
        if name == "non_myopic":
            return personalized.non_myopic(
                user, self.iteration, self.config.total_iter,
                personalized.min_norm(user, self.model, pool),
                personalized.min_rating(user, self.model, pool))
        raise KeyError(name)

    def rank(self, user, pool):
        name = self.config.strategy
        if name in nonpersonalized.STRATEGY_NAMES:
            return np_user_ranking(user, self.np_scores(name), pool)
        if name in personalized.STRATEGY_NAMES:
            return self.personalized(name, user, pool)
        hcfg = self.config.hybrid
        scores = self.np_scores(hcfg.np_strategy)
        shortlist = None
        if hcfg.np_shortlist_size is not None:
            best = sorted(scores, key=lambda i: (-scores[i], i))[:hcfg.np_shortlist_size]
            shortlist = set(best)
        weight = hcfg.weight
        if weight is None:
            weight = hybrid_weight(self.iteration, hcfg.alpha)
        return hybrid_rank(user, np_user_ranking(user, scores, pool),
                           self.personalized(hcfg.p_strategy, user, pool),
                           weight=weight, shortlist=shortlist)


def run(config, split, features=None, on_round=None):
    """Simulate ``config.total_iter`` elicitation rounds on ``split``.

    Returns a :class:`SimulationResult` whose reports start with the
    pre-elicitation baseline (iteration 0). The split is never mutated.
    ``on_round(iteration, K, X, free_cells)`` is called at the end of every
    round with the live state; it must not modify it.
    """
    if config.free_mode != freeratings.OFF and features is None:
        raise ParameterError("free ratings need item features")
    K, X, T = split.K.copy(), split.X.copy(), split.T
    users, items = split.users, split.items
    seed = config.master_seed
    free_cells = {}
    events = []

    start = time.perf_counter()
    model = recsys.train(K, config.train.replace(seed=config.train.seed + seed))
    reports = [IterationReport(0, 0, 0, mae(model, T), time.perf_counter() - start)]
    static_vectors = None
    exhausted = set()
    truncated = False

    for it in range(1, config.total_iter + 1):
        start = time.perf_counter()
        active = [u for u in users if X.row(u)]
        for u in users:
            if u not in exhausted and not X.row(u):
                exhausted.add(u)
                log.info("user %r has no candidates left from round %d", u, it)
        if not active:
            log.warning("every user exhausted their candidates; stopping after round %d", it - 1)
            truncated = True
            break

        ctx = _Round(config, it, K, X, users, items, model)
        selections = {}
        for u in active:
            ranking = ctx.rank(u, X.row(u).keys())
            selections[u] = ranking.top(config.batch_size)

        elicited = {}
        for u in active:
            got = []
            for item in selections[u]:
                rating = X.remove(u, item)
                if (u, item) in free_cells:
                    free_cells.pop((u, item)).status = "overwritten"
                    K.add(u, item, rating, overwrite=True)
                else:
                    K.add(u, item, rating)
                got.append((item, rating))
            elicited[u] = got
        n_elicited = sum(len(v) for v in elicited.values())

        n_free = 0
        if config.free_mode != freeratings.OFF and config.free_budget > 0:
            if config.free_mode == freeratings.FEATURES:
                if static_vectors is None:
                    static_vectors = freeratings.build_vectors(
                        features, None, config.free_mode, items, config.block_norm)
                vectors = static_vectors
            else:
                vectors = freeratings.build_vectors(
                    features, model, config.free_mode, items, config.block_norm)
            for u in active:
                new = freeratings.infer_free_ratings(
                    u, elicited[u], vectors, K, config.free_budget, exclude=T.row(u).keys())
                for ev in new:
                    ev.iteration = it
                    K.add(u, ev.target, ev.rating)
                    free_cells[(u, ev.target)] = ev
                events.extend(new)
                n_free += len(new)

        model = recsys.train(K, config.train.replace(seed=config.train.seed + seed + it))
        reports.append(IterationReport(it, n_elicited, n_free, mae(model, T),
                                       time.perf_counter() - start))
        if on_round is not None:
            on_round(it, K, X, free_cells)

    return SimulationResult(config.name, reports, events, truncated)


def compare_strategies(configs, split, features=None):
    """Run each config on the same split; all configs must share a master seed."""
    configs = list(configs)
    if len({c.master_seed for c in configs}) > 1:
        raise ParameterError("configs compared on one split must share master_seed")
    return [run(c, split, features) for c in configs]


def write_reports(results, path, timings=False):
    """Report CSV, one row per round per strategy.

    ``seconds`` is left blank unless ``timings`` is set so that repeated runs
    produce byte-identical files.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for result in results:
            for r in result.reports:
                writer.writerow([r.iteration, result.strategy, repr(float(r.mae)), r.elicited, r.free,
                                 f"{r.seconds:.3f}" if timings else ""])


def write_events(results, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENT_FIELDS)
        for result in results:
            for ev in result.events:
                writer.writerow([ev.iteration, ev.user, ev.source, ev.target, ev.rating,
                                 repr(float(ev.similarity)), ev.status])


def read_reports(path):
    """``{strategy: [(iter, mae), ...]}`` from a report CSV."""
    series = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            series.setdefault(row["strategy"], []).append((int(row["iter"]), float(row["mae"])))
    return series
