"""Score composition and classification: weighted scores, random forest, metrics."""

from .forest import ForestConfig, RandomForest, Tree, rf_predict, rf_train
from .metrics import ConfusionMatrix, evaluate, roc_auc
from .scoring import (
    ScoreMap,
    ThresholdModel,
    WeightedScorer,
    component_scores,
    fit_score_map,
    train_threshold,
    train_weighted,
    weighted_score,
)

__all__ = [
    "ConfusionMatrix",
    "ForestConfig",
    "RandomForest",
    "ScoreMap",
    "ThresholdModel",
    "Tree",
    "WeightedScorer",
    "component_scores",
    "evaluate",
    "fit_score_map",
    "rf_predict",
    "rf_train",
    "roc_auc",
    "train_threshold",
    "train_weighted",
    "weighted_score",
]
