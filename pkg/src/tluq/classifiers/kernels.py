from __future__ import annotations

import numpy as np

from ..tensor import ShapeError


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ShapeError(f"vectors differ in length: {x.size} vs {y.size}")
    return x, y


def minkowski_distance(x, y, p: float = 2.0) -> float:
    """``(sum |x_i - y_i|^p)^(1/p)`` for ``p >= 1``."""
    if p < 1:
        raise ValueError(f"Minkowski order must be >= 1, got {p}")
    x, y = _pair(x, y)
    return float(np.sum(np.abs(x - y) ** p) ** (1.0 / p))


def rbf_kernel(x, y, sigma: float = 1.0, unsquared_norm: bool = False) -> float:
    """Gaussian kernel ``exp(-||x - y||^2 / (2 sigma^2))``.

    ``unsquared_norm=True`` evaluates ``exp(-||x - y|| / (2 sigma^2))`` instead,
    for comparison against the literal unsquared form.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x, y = _pair(x, y)
    d2 = float(np.sum((x - y) ** 2))
    d = np.sqrt(d2) if unsquared_norm else d2
    return float(np.exp(-d / (2.0 * sigma * sigma)))


def minkowski_matrix(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    """All pairwise distances between rows of ``a`` and rows of ``b``, by the direct formula."""
    out = np.empty((a.shape[0], b.shape[0]))
    for i in range(a.shape[0]):
        out[i] = np.sum(np.abs(b - a[i]) ** p, axis=1) ** (1.0 / p)
    return out


def sq_dist_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    return np.maximum(aa[:, None] + bb[None, :] - 2.0 * (a @ b.T), 0.0)


def rbf_matrix(a: np.ndarray, b: np.ndarray, sigma: float, unsquared_norm: bool = False) -> np.ndarray:
    d = sq_dist_matrix(a, b)
    if unsquared_norm:
        d = np.sqrt(d)
    return np.exp(-d / (2.0 * sigma * sigma))
