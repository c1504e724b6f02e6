"""Soft-margin SVMs trained by SMO on the dual.

Working-set selection uses second-order information (maximal violating
``i``, then the ``j`` with the largest guaranteed objective decrease),
the scheme LIBSVM uses. Training stops once the maximal KKT violation
``m(alpha) - M(alpha)`` falls below ``tol``.
"""

from __future__ import annotations

import warnings

import numpy as np

from .base import ClassifierConfig, TrainedModel, logistic
from .kernels import rbf_matrix

TAU = 1e-12


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-9, max_iter: int | None = None):
    """Solve ``min 1/2 a'Qa - e'a`` s.t. ``y'a = 0, 0 <= a <= C`` with ``Q = yy' * K``.

    ``y`` holds +/-1 labels. Returns ``(alpha, rho)``; the decision function
    is ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    n = K.shape[0]
    y = y.astype(np.float64)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q alpha - e
    diag = np.diag(K).copy()
    if max_iter is None:
        max_iter = max(1_000_000, 100 * n)
    for _ in range(max_iter):
        yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(yg[up])])
        gmax = yg[i]
        gmin = yg[low].min()
        if gmax - gmin < tol:
            break
        cand = low & (yg < gmax)
        b = gmax - yg[cand]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, TAU)
        j = int(np.flatnonzero(cand)[np.argmin(-(b * b) / a)])

        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] - 2.0 * K[i, j]
            quad = quad if quad > 0 else TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * K[i, j]
            quad = quad if quad > 0 else TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += y * (K[:, i] * y[i] * (ai - ai_old) + K[:, j] * y[j] * (aj - aj_old))
    else:
        warnings.warn("SMO reached its iteration cap before meeting the KKT tolerance", RuntimeWarning)

    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yg[free].mean())
    else:
        # midpoint of the feasible interval for rho
        ub, lb = np.inf, -np.inf
        for t in range(n):
            if (alpha[t] >= C and y[t] < 0) or (alpha[t] <= 0 and y[t] > 0):
                ub = min(ub, yg[t])
            else:
                lb = max(lb, yg[t])
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else float(ub if np.isfinite(ub) else lb)
    return alpha, rho


class SVMModel(TrainedModel):
    """Score is the raw margin; probability is ``1 / (1 + exp(-margin))``."""

    def __init__(self, config, n_features, alpha, rho, sv_x, sv_coef, weight=None):
        super().__init__(config, n_features)
        self.alpha = alpha  # full dual vector over the training set
        self.rho = float(rho)
        self.sv_x = sv_x
        self.sv_coef = sv_coef  # alpha_i * y_i for support vectors
        self.weight = weight

    def _score(self, x):
        if self.weight is not None:
            return x @ self.weight - self.rho
        k = rbf_matrix(x, self.sv_x, self.config.sigma, self.config.unsquared_norm)
        return k @ self.sv_coef - self.rho

    def _proba1(self, x):
        return logistic(self._score(x))

    def get_state(self):
        arrays = {"alpha": self.alpha, "sv_x": self.sv_x, "sv_coef": self.sv_coef}
        if self.weight is not None:
            arrays["weight"] = self.weight
        return {"rho": self.rho}, arrays

    @classmethod
    def from_state(cls, config, n_features, meta, arrays):
        return cls(config, n_features, arrays["alpha"], meta["rho"], arrays["sv_x"], arrays["sv_coef"],
                   arrays.get("weight"))


class LinearSVMModel(SVMModel):
    kind = "linear_svm"


class RBFSVMModel(SVMModel):
    kind = "rbf_svm"


def _fit(cls, config: ClassifierConfig, x: np.ndarray, y01: np.ndarray, K: np.ndarray, linear: bool):
    y = np.where(y01 == 1, 1.0, -1.0)
    alpha, rho = smo(K, y, config.c_penalty)
    sv = alpha > 0
    coef = alpha[sv] * y[sv]
    weight = x[sv].T @ coef if linear else None
    return cls(config, x.shape[1], alpha, rho, x[sv].copy(), coef, weight)


def fit_linear_svm(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> LinearSVMModel:
    return _fit(LinearSVMModel, config, x, y, x @ x.T, linear=True)


def fit_rbf_svm(config: ClassifierConfig, x: np.ndarray, y: np.ndarray) -> RBFSVMModel:
    K = rbf_matrix(x, x, config.sigma, config.unsquared_norm)
    np.fill_diagonal(K, 1.0)
    return _fit(RBFSVMModel, config, x, y, K, linear=False)
