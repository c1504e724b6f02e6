"""PCA for 2-D views of deep features.

Covariance uses the ``1/(n-1)`` normalisation. When there are more columns
than rows the eigenproblem is solved on the ``n x n`` Gram matrix of the
centred data and mapped back, which keeps 100k-wide feature tables cheap.
Each component's sign is fixed so its largest-magnitude entry is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import ShapeError, as_matrix, eigh


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def fit_pca(x, k: int) -> PcaModel:
    x = as_matrix(x, "PCA input")
    n, d = x.shape
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    if not 1 <= k <= min(n - 1, d):
        raise ValueError(f"k must lie in [1, {min(n - 1, d)}] for a {n}x{d} table, got {k}")
    mean = x.mean(axis=0)
    xc = x - mean
    if d > n:
        gram = (xc @ xc.T) / (n - 1)
        w, u = eigh(gram)
        w, u = np.maximum(w[:k], 0.0), u[:, :k]
        comps = []
        for i in range(k):
            v = xc.T @ u[:, i]
            norm = np.linalg.norm(v)
            if norm == 0.0:
                raise ValueError(f"component {i} has zero variance; lower k")
            comps.append(v / norm)
        comps = np.array(comps)
    else:
        cov = (xc.T @ xc) / (n - 1)
        w, v = eigh(cov)
        w, comps = np.maximum(w[:k], 0.0), v[:, :k].T
    comps = np.array([_canonical_sign(c) for c in comps])
    return PcaModel(mean, comps, w.copy())


def transform(model: PcaModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.mean.shape[0]:
        raise ShapeError(f"PCA was fit on {model.mean.shape[0]} columns, got {x.shape[1]}")
    z = (x - model.mean) @ model.components.T
    return z[0] if single else z


def inverse_transform(model: PcaModel, z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    return model.mean + z @ model.components
