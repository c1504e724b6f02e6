"""One-hidden-layer perceptron: logistic hidden units, softmax output, cross-entropy loss.

Trained by plain minibatch SGD. Weights start Glorot-uniform and biases at
zero; each epoch visits the rows in a fresh seeded permutation.
"""

from __future__ import annotations

import numpy as np

from ..rng import Rng
from .base import ClassifierConfig, TrainedModel, logistic

PARAM_NAMES = ("w1", "b1", "w2", "b2")


def glorot_uniform(rng: Rng, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform((fan_in, fan_out), -limit, limit)


def init_params(n_in: int, n_hidden: int, rng: Rng) -> dict[str, np.ndarray]:
    return {
        "w1": glorot_uniform(rng, n_in, n_hidden),
        "b1": np.zeros(n_hidden),
        "w2": glorot_uniform(rng, n_hidden, 2),
        "b2": np.zeros(2),
    }


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(params, x):
    h = logistic(x @ params["w1"] + params["b1"])
    return h, softmax(h @ params["w2"] + params["b2"])


def loss(params, x, y) -> float:
    """Mean cross-entropy of 0/1 labels ``y``."""
    z = logistic(x @ params["w1"] + params["b1"]) @ params["w2"] + params["b2"]
    zmax = z.max(axis=1, keepdims=True)
    logsum = (zmax + np.log(np.exp(z - zmax).sum(axis=1, keepdims=True)))[:, 0]
    return float(np.mean(logsum - z[np.arange(len(y)), y]))


def loss_and_grad(params, x, y):
    n = x.shape[0]
    h, p = forward(params, x)
    picked = np.clip(p[np.arange(n), y], 1e-300, None)
    value = float(-np.mean(np.log(picked)))
    dz = p.copy()
    dz[np.arange(n), y] -= 1.0
    dz /= n
    dh = (dz @ params["w2"].T) * h * (1.0 - h)
    grads = {
        "w1": x.T @ dh,
        "b1": dh.sum(axis=0),
        "w2": h.T @ dz,
        "b2": dz.sum(axis=0),
    }
    return value, grads


class MLPModel(TrainedModel):
    kind = "mlp"

    def __init__(self, config, n_features, params):
        super().__init__(config, n_features)
        self.params = params

    @property
    def hidden_units(self) -> int:
        return self.params["b1"].shape[0]

    def _proba1(self, x):
        return forward(self.params, x)[1][:, 1]

    def get_state(self):
        return {}, dict(self.params)

    @classmethod
    def from_state(cls, config, n_features, meta, arrays):
        return cls(config, n_features, {name: arrays[name] for name in PARAM_NAMES})


def fit_mlp(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> MLPModel:
    rng = Rng(config.seed)
    params = init_params(x.shape[1], config.hidden_units, rng)
    n, bs, lr = x.shape[0], config.batch_size, config.learning_rate
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            _, grads = loss_and_grad(params, x[idx], y[idx])
            for name in PARAM_NAMES:
                params[name] -= lr * grads[name]
    return MLPModel(config, x.shape[1], params)
