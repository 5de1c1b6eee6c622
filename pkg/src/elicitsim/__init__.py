"""Offline simulation of active-learning rating elicitation for collaborative filtering."""

from .dataset import (DatasetSplit, ItemFeatureMatrix, RatingTriple, SparseRatingMatrix,
                      filter_dense, load_item_features, load_ratings, split)
from .hybrid import HybridConfig, hybrid_rank, hybrid_weight
from .recsys import FactorModel, TrainConfig, predict, train
from .simulator import SimulationConfig, compare_strategies, mae, run

__version__ = "0.1.0"
