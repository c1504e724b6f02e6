"""Random forest of Gini trees grown to purity on bootstrap samples."""

from __future__ import annotations

import math

import numpy as np

from ..rng import Rng, derive_seed
from .base import ClassifierConfig, TrainedModel


def _best_split(x: np.ndarray, y: np.ndarray, features: np.ndarray):
    """Lowest weighted-Gini split among ``features``.

    Returns ``(impurity, feature, threshold)`` or ``None`` when every
    candidate feature is constant on this node. Thresholds are midpoints
    between consecutive distinct values; ties keep the earliest candidate.
    """
    n = x.shape[0]
    cols = x[:, features]
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    ys = y[order]
    left_pos = np.cumsum(ys, axis=0)[:-1]  # positives among the first m rows, m = 1..n-1
    m = np.arange(1, n)[:, None]
    right_pos = ys.sum(axis=0)[None, :] - left_pos
    pl = left_pos / m
    pr = right_pos / (n - m)
    gini = (m * 2 * pl * (1 - pl) + (n - m) * 2 * pr * (1 - pr)) / n
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    gini = np.where(valid, gini, np.inf)
    best_per_feature = gini.min(axis=0)
    fi = int(np.argmin(best_per_feature))
    if not np.isfinite(best_per_feature[fi]):
        return None
    row = int(np.argmin(gini[:, fi]))
    thr = 0.5 * (xs[row, fi] + xs[row + 1, fi])
    if not thr < xs[row + 1, fi]:  # midpoint rounded onto the upper value
        thr = xs[row, fi]
    return float(best_per_feature[fi]), int(features[fi]), float(thr)


class Tree:
    """Flat binary tree: internal nodes test ``x[feature] <= threshold``; leaves vote 0 or 1."""

    def __init__(self, feature, threshold, left, right, vote):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.vote = np.asarray(vote, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = x[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.vote[self.apply(x)]


def grow_tree(x: np.ndarray, y: np.ndarray, rng: Rng, max_features: int) -> Tree:
    feature, threshold, left, right, vote = [], [], [], [], []

    def new_node():
        for lst, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1), (vote, 0)):
            lst.append(v)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(x.shape[0]))]
    d = x.shape[1]
    while stack:
        node, idx = stack.pop()
        yn = y[idx]
        pos = int(yn.sum())
        vote[node] = 1 if 2 * pos > len(idx) else 0
        if pos == 0 or pos == len(idx):
            continue
        perm = rng.partial_permutation(d, max_features)
        found = _best_split(x[idx], yn, perm[:max_features])
        if found is None and max_features < d:
            # keep looking past the sampled features until some split separates the node
            found = _best_split(x[idx], yn, perm[max_features:])
        if found is None:
            continue
        _, f, thr = found
        go_left = x[idx, f] <= thr
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new_node(), new_node()
        stack.append((right[node], idx[~go_left]))
        stack.append((left[node], idx[go_left]))
    return Tree(feature, threshold, left, right, vote)


class RandomForestModel(TrainedModel):
    """Probability of class 1 is the fraction of trees voting for it."""

    kind = "random_forest"

    def __init__(self, config, n_features, trees):
        super().__init__(config, n_features)
        self.trees = trees

    def _proba1(self, x):
        return np.mean([t.predict(x) for t in self.trees], axis=0)

    def get_state(self):
        arrays = {}
        for i, t in enumerate(self.trees):
            for name in ("feature", "threshold", "left", "right", "vote"):
                arrays[f"tree{i}/{name}"] = getattr(t, name).astype(np.float64)
        return {"n_trees": len(self.trees)}, arrays

    @classmethod
    def from_state(cls, config, n_features, meta, arrays):
        trees = [Tree(*(arrays[f"tree{i}/{name}"] for name in ("feature", "threshold", "left", "right", "vote")))
                 for i in range(meta["n_trees"])]
        return cls(config, n_features, trees)


def fit_random_forest(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> RandomForestModel:
    n, d = x.shape
    max_features = max(1, int(math.isqrt(d)))
    trees = []
    for i in range(config.n_trees):
        rng = Rng(derive_seed(config.seed, i))
        boot = np.array([rng.integers(0, n) for _ in range(n)], dtype=np.int64)
        trees.append(grow_tree(x[boot], y[boot], rng, max_features))
    return RandomForestModel(config, d, trees)
