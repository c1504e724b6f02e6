from __future__ import annotations

import numpy as np

from .base import ClassifierConfig, TrainedModel
from .kernels import minkowski_matrix


class KNNModel(TrainedModel):
    """Stores the training set; votes among the ``k`` nearest rows by Minkowski distance.

    Neighbours at equal distance are ordered by training index. With k=2 a
    split vote gives probability 0.5/0.5, and ``predict_label`` then follows
    the single nearest neighbour.
    """

    kind = "knn"

    def __init__(self, config: ClassifierConfig, x: np.ndarray, y: np.ndarray):
        super().__init__(config, x.shape[1])
        self.x = x
        self.y = y

    def neighbours(self, x: np.ndarray) -> np.ndarray:
        d = minkowski_matrix(x, self.x, self.config.minkowski_p)
        k = min(self.config.k, self.x.shape[0])
        return np.argsort(d, axis=1, kind="stable")[:, :k]

    def _proba1(self, x):
        return self.y[self.neighbours(x)].mean(axis=1)

    def _label(self, x):
        nb = self.neighbours(x)
        p1 = self.y[nb].mean(axis=1)
        label = (p1 > 0.5).astype(np.int64)
        tie = p1 == 0.5
        label[tie] = self.y[nb[tie, 0]]
        return label

    def get_state(self):
        return {}, {"x": self.x, "y": self.y.astype(np.float64)}

    @classmethod
    def from_state(cls, config, n_features, meta, arrays):
        return cls(config, arrays["x"], arrays["y"].astype(np.int64))


def fit_knn(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> KNNModel:
    return KNNModel(config, x.copy(), y.copy())
