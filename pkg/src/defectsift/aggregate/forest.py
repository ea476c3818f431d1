"""Random forest of Gini decision trees, built from scratch."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, SingleClassTraining


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 2
    features_per_split: int | None = None  # None -> ceil(sqrt(d))
    seed: int = 0


@dataclass
class Tree:
    """Flat binary tree; internal nodes have ``leaf_class == -1``.

    A sample goes left when ``x[feature] <= threshold``.
    """

    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    leaf_class: list = field(default_factory=list)

    def _add(self, feature=-1, threshold=0.0, leaf_class=-1) -> int:
        self.feature.append(int(feature))
        self.threshold.append(float(threshold))
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_class.append(int(leaf_class))
        return len(self.feature) - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        feat = np.asarray(self.feature)
        thr = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        leaf = np.asarray(self.leaf_class)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = leaf[node] < 0
        while np.any(active):
            n = node[active]
            go_left = X[active, feat[n]] <= thr[n]
            node[active] = np.where(go_left, left[n], right[n])
            active = leaf[node] < 0
        return leaf[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "leaf_class": self.leaf_class,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(list(d["feature"]), [float(v) for v in d["threshold"]], list(d["left"]),
                   list(d["right"]), list(d["leaf_class"]))


def _majority(y: np.ndarray) -> int:
    # Ties resolve toward defect (1).
    return 1 if 2 * int(y.sum()) >= y.size else 0


def _best_split(X: np.ndarray, y: np.ndarray, feats, min_leaf: int):
    """Lowest weighted Gini over candidate features; ``None`` if nothing improves."""
    n = y.size
    pos = y.sum()
    parent = 1.0 - (pos / n) ** 2 - ((n - pos) / n) ** 2
    best = None
    best_imp = parent - 1e-12
    for f in feats:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        left_n = np.arange(1, n)
        left_pos = np.cumsum(ys)[:-1]
        right_n = n - left_n
        right_pos = pos - left_pos
        valid = (xs[1:] > xs[:-1]) & (left_n >= min_leaf) & (right_n >= min_leaf)
        if not np.any(valid):
            continue
        pl = left_pos / left_n
        pr = right_pos / right_n
        gini = (left_n * 2 * pl * (1 - pl) + right_n * 2 * pr * (1 - pr)) / n
        gini = np.where(valid, gini, np.inf)
        k = int(np.argmin(gini))
        if gini[k] < best_imp:
            best_imp = gini[k]
            best = (int(f), 0.5 * (xs[k] + xs[k + 1]))
    return best


def build_tree(X: np.ndarray, y: np.ndarray, cfg: ForestConfig, m: int, rng: np.random.Generator) -> Tree:
    tree = Tree()
    d = X.shape[1]
    root = tree._add()
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yy = y[idx]
        split = None
        if depth < cfg.max_depth and idx.size >= 2 * cfg.min_leaf and 0 < yy.sum() < yy.size:
            feats = rng.choice(d, size=m, replace=False)
            split = _best_split(X[idx], yy, feats, cfg.min_leaf)
        if split is None:
            tree.leaf_class[node] = _majority(yy)
            continue
        f, thr = split
        tree.feature[node], tree.threshold[node] = f, float(thr)
        go_left = X[idx, f] <= thr
        left, right = tree._add(), tree._add()
        tree.left[node], tree.right[node] = left, right
        stack.append((right, idx[~go_left], depth + 1))
        stack.append((left, idx[go_left], depth + 1))
    return tree


@dataclass
class RandomForest:
    trees: list
    n_features: int
    config: ForestConfig
    oob_accuracy: float | None = None

    @property
    def T(self) -> int:
        return len(self.trees)

    def votes(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"forest expects {self.n_features} features, got {X.shape[1]}")
        return np.column_stack([t.predict(X) for t in self.trees])

    def to_dict(self) -> dict:
        c = self.config
        return {
            "n_trees": c.n_trees,
            "max_depth": c.max_depth,
            "min_leaf": c.min_leaf,
            "features_per_split": c.features_per_split,
            "seed": c.seed,
            "n_features": self.n_features,
            "oob_accuracy": self.oob_accuracy,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForest":
        cfg = ForestConfig(d["n_trees"], d["max_depth"], d["min_leaf"], d["features_per_split"], d["seed"])
        return cls([Tree.from_dict(t) for t in d["trees"]], int(d["n_features"]), cfg, d.get("oob_accuracy"))


def rf_train(X, y, cfg: ForestConfig | None = None) -> RandomForest:
    """Bootstrap-aggregated Gini trees with ``features_per_split`` random features per node."""
    cfg = cfg or ForestConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionMismatch("X must be (n, d) with one label per row")
    if np.unique(y).size < 2:
        raise SingleClassTraining("training data must contain both classes")
    n, d = X.shape
    m = cfg.features_per_split or int(math.ceil(math.sqrt(d)))
    m = max(1, min(m, d))
    trees = []
    oob_votes = np.zeros(n)
    oob_counts = np.zeros(n)
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(n, size=n)
        tree = build_tree(X[boot], y[boot], cfg, m, rng)
        trees.append(tree)
        oob = np.ones(n, dtype=bool)
        oob[boot] = False
        if np.any(oob):
            oob_votes[oob] += tree.predict(X[oob])
            oob_counts[oob] += 1
    seen = oob_counts > 0
    oob_acc = None
    if np.any(seen):
        pred = (oob_votes[seen] / oob_counts[seen] >= 0.5).astype(np.int64)
        oob_acc = float(np.mean(pred == y[seen]))
    return RandomForest(trees, d, cfg, oob_acc)


def rf_predict(forest: RandomForest, x):
    """``(class, S)`` with ``S`` the fraction of trees voting defect; ``S >= 0.5`` -> 1.

    Accepts one vector (scalars returned) or a matrix of rows (arrays returned).
    """
    single = np.ndim(x) == 1
    s = forest.votes(x).mean(axis=1)
    cls = (s >= 0.5).astype(np.int64)
    return (int(cls[0]), float(s[0])) if single else (cls, s)
