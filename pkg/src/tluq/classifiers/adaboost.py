"""Discrete two-class AdaBoost over decision stumps.

Each round fits the stump with the lowest weighted error over every
feature, threshold and polarity, then reweights by ``exp(-alpha * y * h)``
with ``y, h`` in {-1, +1}. The weighted error is floored at 1e-10; a stump
that reaches the floor ends boosting early. The ensemble score
``F(x) = sum alpha_t h_t(x)`` maps to ``P(class 1) = 1 / (1 + exp(-2 F))``.
"""

from __future__ import annotations

import numpy as np

from .base import ClassifierConfig, TrainedModel, logistic

EPS_FLOOR = 1e-10


def fit_stump(x_sorted: np.ndarray, order: np.ndarray, ys: np.ndarray, w: np.ndarray):
    """Best stump for sample weights ``w`` and +/-1 labels ``ys``.

    ``order`` holds the per-feature argsort of the training matrix and
    ``x_sorted`` the correspondingly sorted values. Returns
    ``(error, feature, threshold, polarity)``; polarity +1 predicts +1 above
    the threshold, -1 predicts +1 at or below it.
    """
    n, d = x_sorted.shape
    wpos = np.where(ys > 0, w, 0.0)[order]
    wneg = np.where(ys < 0, w, 0.0)[order]
    # rows 0..n: first m sorted samples on the "<= threshold" side
    pos_left = np.vstack([np.zeros((1, d)), np.cumsum(wpos, axis=0)])
    neg_left = np.vstack([np.zeros((1, d)), np.cumsum(wneg, axis=0)])
    total_pos, total_neg = pos_left[-1], neg_left[-1]
    # polarity +1: left predicts -1, right predicts +1
    err_plus = pos_left + (total_neg - neg_left)
    err_minus = neg_left + (total_pos - pos_left)
    valid = np.ones((n + 1, d), dtype=bool)
    valid[1:n] = x_sorted[1:] > x_sorted[:-1]
    err = np.where(valid, np.minimum(err_plus, err_minus), np.inf)
    flat = int(np.argmin(err))
    m, f = divmod(flat, d)
    polarity = 1 if err_plus[m, f] <= err_minus[m, f] else -1
    if m == 0:
        thr = -np.inf
    elif m == n:
        thr = np.inf
    else:
        thr = 0.5 * (x_sorted[m - 1, f] + x_sorted[m, f])
        if not thr < x_sorted[m, f]:
            thr = x_sorted[m - 1, f]
    return float(err[m, f]), int(f), float(thr), polarity


def stump_predict(x: np.ndarray, feature: int, threshold: float, polarity: int) -> np.ndarray:
    above = x[:, feature] > threshold
    return np.where(above, polarity, -polarity).astype(np.float64)


class AdaBoostModel(TrainedModel):
    kind = "adaboost"

    def __init__(self, config, n_features, features, thresholds, polarities, alphas):
        super().__init__(config, n_features)
        self.features = np.asarray(features, dtype=np.int64)
        self.thresholds = np.asarray(thresholds, dtype=np.float64)
        self.polarities = np.asarray(polarities, dtype=np.int64)
        self.alphas = np.asarray(alphas, dtype=np.float64)

    @property
    def n_rounds(self) -> int:
        return self.alphas.shape[0]

    def staged_scores(self, x: np.ndarray) -> np.ndarray:
        """``F`` after each round, shape ``(n_rounds, n_samples)``."""
        terms = [a * stump_predict(x, f, t, p)
                 for f, t, p, a in zip(self.features, self.thresholds, self.polarities, self.alphas)]
        return np.cumsum(terms, axis=0)

    def margin(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(x.shape[0])
        for f, t, p, a in zip(self.features, self.thresholds, self.polarities, self.alphas):
            out += a * stump_predict(x, f, t, p)
        return out

    def _proba1(self, x):
        return logistic(2.0 * self.margin(x))

    def get_state(self):
        return {}, {"features": self.features.astype(np.float64), "thresholds": self.thresholds,
                    "polarities": self.polarities.astype(np.float64), "alphas": self.alphas}

    @classmethod
    def from_state(cls, config, n_features, meta, arrays):
        return cls(config, n_features, arrays["features"], arrays["thresholds"], arrays["polarities"],
                   arrays["alphas"])


def fit_adaboost(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> AdaBoostModel:
    n = x.shape[0]
    ys = np.where(y == 1, 1.0, -1.0)
    order = np.argsort(x, axis=0, kind="stable")
    x_sorted = np.take_along_axis(x, order, axis=0)
    w = np.full(n, 1.0 / n)
    feats, thrs, pols, alphas = [], [], [], []
    for _ in range(config.n_weak):
        err, f, thr, pol = fit_stump(x_sorted, order, ys, w)
        err = min(max(err, EPS_FLOOR), 1.0 - EPS_FLOOR)
        if err >= 0.5:
            break
        alpha = 0.5 * np.log((1.0 - err) / err)
        feats.append(f)
        thrs.append(thr)
        pols.append(pol)
        alphas.append(alpha)
        if err <= EPS_FLOOR:
            break
        w = w * np.exp(-alpha * ys * stump_predict(x, f, thr, pol))
        w /= w.sum()
    return AdaBoostModel(config, x.shape[1], feats, thrs, pols, alphas)
