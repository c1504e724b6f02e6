"""Binary GP classification with a logistic likelihood and the Laplace approximation.

Newton iterations for the posterior mode follow the numerically stable
``B = I + W^1/2 K W^1/2`` formulation. Predictive class probabilities
average the logistic over the Gaussian latent predictive with the probit
approximation ``sigma(mean / sqrt(1 + pi * var / 8))``.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .base import ClassifierConfig, TrainedModel, logistic
from .kernels import rbf_matrix

JITTER = 1e-8
MAX_NEWTON = 50
NEWTON_TOL = 1e-8


def laplace_mode(K: np.ndarray, t: np.ndarray):
    """Posterior mode of the latent function for 0/1 targets ``t``.

    Returns ``(f_hat, grad_loglik, sqrt_W, L)`` where ``L`` is the lower
    Cholesky factor of ``B`` at the mode.
    """
    n = K.shape[0]
    f = np.zeros(n)
    for it in range(MAX_NEWTON):
        pi = logistic(f)
        W = pi * (1.0 - pi)
        sW = np.sqrt(W)
        L = np.linalg.cholesky(np.eye(n) + sW[:, None] * K * sW[None, :])
        b = W * f + (t - pi)
        a = b - sW * cho_solve((L, True), sW * (K @ b))
        f_new = K @ a
        step = np.abs(f_new - f).max()
        f = f_new
        if step < NEWTON_TOL:
            break
    else:
        warnings.warn("GP Laplace Newton iterations hit the cap before converging", RuntimeWarning)
    pi = logistic(f)
    W = pi * (1.0 - pi)
    sW = np.sqrt(W)
    L = np.linalg.cholesky(np.eye(n) + sW[:, None] * K * sW[None, :])
    return f, t - pi, sW, L


class GPModel(TrainedModel):
    kind = "gp"

    def __init__(self, config, x, f_hat, grad, sW, L):
        super().__init__(config, x.shape[1])
        self.x = x
        self.f_hat = f_hat
        self.grad = grad
        self.sW = sW
        self.L = L

    def latent(self, x: np.ndarray):
        """Predictive mean and variance of the latent function at rows of ``x``."""
        ks = rbf_matrix(x, self.x, self.config.sigma, self.config.unsquared_norm)
        mean = ks @ self.grad
        v = solve_triangular(self.L, (self.sW[:, None] * ks.T), lower=True)
        var = np.maximum(1.0 - np.sum(v * v, axis=0), 0.0)  # k(x, x) = 1
        return mean, var

    def _proba1(self, x):
        mean, var = self.latent(x)
        return logistic(mean / np.sqrt(1.0 + np.pi * var / 8.0))

    def get_state(self):
        return {}, {"x": self.x, "f_hat": self.f_hat, "grad": self.grad, "sW": self.sW, "L": self.L}

    @classmethod
    def from_state(cls, config, n_features, meta, arrays):
        return cls(config, arrays["x"], arrays["f_hat"], arrays["grad"], arrays["sW"], arrays["L"])


def fit_gp(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> GPModel:
    K = rbf_matrix(x, x, config.sigma, config.unsquared_norm)
    np.fill_diagonal(K, 1.0 + JITTER)
    f, grad, sW, L = laplace_mode(K, y.astype(np.float64))
    return GPModel(config, x.copy(), f, grad, sW, L)
