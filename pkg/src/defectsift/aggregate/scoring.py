"""Per-feature score maps, the weighted composite score and the threshold classifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import IndexOutOfRegistry, SingleClassTraining
from ..selection import decision_threshold, fisher_score

# A training point at the median distance from the threshold maps to 0.9 / 0.1.
LOGIT_09 = math.log(9.0)


@dataclass(frozen=True)
class ScoreMap:
    """Logistic squash of the signed distance to a decision threshold."""

    theta: float
    direction: str
    slope: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        sign = 1.0 if self.direction == "above" else -1.0
        return expit(sign * self.slope * (x - self.theta))

    def to_dict(self) -> dict:
        return {"theta": self.theta, "direction": self.direction, "slope": self.slope}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreMap":
        return cls(float(d["theta"]), d["direction"], float(d["slope"]))


def fit_score_map(x_tp, x_fp) -> tuple[ScoreMap, float]:
    """Score map for one feature and its training balanced accuracy."""
    dt = decision_threshold(x_tp, x_fp)
    dist = np.abs(np.concatenate([np.ravel(x_tp), np.ravel(x_fp)]) - dt.theta)
    scale = float(np.median(dist))
    if scale <= 0:
        scale = float(dist.mean())
    slope = LOGIT_09 / scale if scale > 0 else 1.0
    return ScoreMap(dt.theta, dt.direction, slope), dt.balanced_accuracy


@dataclass(frozen=True)
class WeightedScorer:
    indices: tuple
    weights: tuple
    maps: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.indices) != w.size or len(self.maps) != w.size:
            raise ValueError("indices, weights and maps must have equal length")
        if w.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")

    def to_dict(self) -> dict:
        return {
            "indices": [int(i) for i in self.indices],
            "weights": [float(w) for w in self.weights],
            "maps": [m.to_dict() for m in self.maps],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedScorer":
        return cls(tuple(d["indices"]), tuple(d["weights"]), tuple(ScoreMap.from_dict(m) for m in d["maps"]))


def component_scores(scorer: WeightedScorer, x) -> np.ndarray:
    """``S_i`` for each referenced feature; ``x`` is one vector or a matrix of rows."""
    x = np.asarray(x, dtype=float)
    rows = x.reshape(1, -1) if x.ndim == 1 else x
    d = rows.shape[1]
    bad = [i for i in scorer.indices if not 0 <= i < d]
    if bad:
        raise IndexOutOfRegistry(f"feature indices {bad} outside a vector of length {d}")
    return np.column_stack([m(rows[:, i]) for i, m in zip(scorer.indices, scorer.maps)])


def weighted_score(scorer: WeightedScorer, x):
    """``S = sum_i w_i S_i``; a scalar for one vector, an array for a matrix."""
    s = component_scores(scorer, x) @ np.asarray(scorer.weights, dtype=float)
    return float(s[0]) if np.ndim(x) == 1 else s


def _split(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    if np.unique(y).size < 2:
        raise SingleClassTraining("training data must contain both classes")
    return X[y == 1], X[y == 0]


def train_weighted(X, y, indices) -> WeightedScorer:
    """Fisher-weighted combination of per-feature score maps (label 1 = defect)."""
    tp, fp = _split(X, y)
    indices = [int(i) for i in indices]
    if not indices:
        raise ValueError("weighted scorer needs at least one feature")
    maps = [fit_score_map(tp[:, i], fp[:, i])[0] for i in indices]
    f = np.array([fisher_score(tp[:, i], fp[:, i]) for i in indices])
    w = f / f.sum() if f.sum() > 0 else np.full(len(indices), 1.0 / len(indices))
    return WeightedScorer(tuple(indices), tuple(float(v) for v in w), tuple(maps))


@dataclass(frozen=True)
class ThresholdModel:
    """Single-feature threshold classifier; its score is the feature's score map."""

    index: int
    theta: float
    direction: str
    balanced_accuracy: float
    score_map: ScoreMap

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not 0 <= self.index < X.shape[1]:
            raise IndexOutOfRegistry(f"feature index {self.index} outside a vector of length {X.shape[1]}")
        x = X[:, self.index]
        cls = (x > self.theta) if self.direction == "above" else (x < self.theta)
        return cls.astype(np.int64), self.score_map(x)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "theta": self.theta,
            "direction": self.direction,
            "balanced_accuracy": self.balanced_accuracy,
            "score_map": self.score_map.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ThresholdModel":
        return cls(int(d["index"]), float(d["theta"]), d["direction"], float(d["balanced_accuracy"]),
                   ScoreMap.from_dict(d["score_map"]))


def train_threshold(X, y, index: int) -> ThresholdModel:
    tp, fp = _split(X, y)
    smap, ba = fit_score_map(tp[:, index], fp[:, index])
    return ThresholdModel(int(index), smap.theta, smap.direction, ba, smap)
