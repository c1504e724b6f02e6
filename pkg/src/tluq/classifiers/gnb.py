from __future__ import annotations

import numpy as np

from .base import ClassifierConfig, TrainedModel

VAR_FLOOR = 1e-9


class GNBModel(TrainedModel):
    """Gaussian naive Bayes with class-frequency priors and per-class, per-feature variances."""

    kind = "gnb"

    def __init__(self, config, classes, priors, means, variances):
        super().__init__(config, means.shape[1])
        self.classes = classes  # labels present in training, ascending
        self.priors = priors
        self.means = means
        self.variances = variances

    def log_joint(self, x: np.ndarray) -> np.ndarray:
        out = np.empty((x.shape[0], len(self.classes)))
        for c in range(len(self.classes)):
            var = self.variances[c]
            out[:, c] = (np.log(self.priors[c])
                         - 0.5 * np.sum(np.log(2.0 * np.pi * var))
                         - 0.5 * np.sum((x - self.means[c]) ** 2 / var, axis=1))
        return out

    def _proba1(self, x):
        if len(self.classes) == 1:
            return np.full(x.shape[0], float(self.classes[0]))
        lj = self.log_joint(x)
        m = lj.max(axis=1, keepdims=True)
        post = np.exp(lj - m)
        post /= post.sum(axis=1, keepdims=True)
        return post[:, 1]

    def get_state(self):
        return {"classes": [int(c) for c in self.classes]}, {
            "priors": self.priors, "means": self.means, "variances": self.variances}

    @classmethod
    def from_state(cls, config, n_features, meta, arrays):
        return cls(config, np.array(meta["classes"]), arrays["priors"], arrays["means"], arrays["variances"])


def fit_gnb(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> GNBModel:
    classes = np.unique(y)
    priors = np.array([np.mean(y == c) for c in classes])
    means = np.array([x[y == c].mean(axis=0) for c in classes])
    variances = np.array([np.maximum(x[y == c].var(axis=0), VAR_FLOOR) for c in classes])
    return GNBModel(config, classes, priors, means, variances)
