from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..tensor import ShapeError

KINDS = ("knn", "linear_svm", "rbf_svm", "gp", "mlp", "random_forest", "adaboost", "gnb")
# kinds that tolerate a single-class training set and then predict that class
ONE_CLASS_OK = ("knn", "gnb")


@dataclass(frozen=True)
class ClassifierConfig:
    """Hyperparameters for one classifier kind; fields not used by a kind are ignored."""

    kind: str
    k: int = 2
    minkowski_p: float = 2.0
    sigma: float = 1.0
    c_penalty: float = 1.0
    unsquared_norm: bool = False
    hidden_units: int = 100
    epochs: int = 200
    learning_rate: float = 0.01
    batch_size: int = 16
    n_trees: int = 10
    n_weak: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}; choose from {', '.join(KINDS)}")
        for name in ("k", "hidden_units", "epochs", "batch_size", "n_trees", "n_weak"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.minkowski_p < 1:
            raise ValueError("minkowski_p must be >= 1")
        if self.sigma <= 0 or self.c_penalty <= 0 or self.learning_rate <= 0:
            raise ValueError("sigma, c_penalty and learning_rate must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def replace(self, **changes) -> "ClassifierConfig":
        return ClassifierConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


def logistic(z):
    z = np.asarray(z, dtype=np.float64)
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def check_training(x, y, kind: str):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"training features must be a non-empty 2-D table, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("training features contain non-finite values")
    if kind not in ONE_CLASS_OK and np.unique(y).size < 2:
        raise ValueError(f"{kind} needs both classes in the training set")
    return x, y


class TrainedModel:
    """Fitted binary classifier. Subclasses implement ``_proba1`` (and may override scoring)."""

    kind: str = ""

    def __init__(self, config: ClassifierConfig, n_features: int):
        self.config = config
        self.n_features = int(n_features)

    def _rows(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ShapeError(f"{self.kind} model was fit on {self.n_features} features, "
                             f"got input of shape {np.shape(x)}")
        if not np.all(np.isfinite(x)):
            raise ValueError("input contains non-finite values")
        return x, single

    def _proba1(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _score(self, x: np.ndarray) -> np.ndarray:
        return self._proba1(x)

    def _label(self, x: np.ndarray) -> np.ndarray:
        # ties at exactly 0.5 go to class 0
        return (self._proba1(x) > 0.5).astype(np.int64)

    def predict_proba(self, x) -> np.ndarray:
        """Rows of ``(P(class 0), P(class 1))``; a single 1-D row gives a length-2 vector."""
        x, single = self._rows(x)
        p1 = np.clip(self._proba1(x), 0.0, 1.0)
        out = np.column_stack([1.0 - p1, p1])
        return out[0] if single else out

    def predict_label(self, x):
        x, single = self._rows(x)
        out = self._label(x)
        return int(out[0]) if single else out

    def decision_score(self, x):
        x, single = self._rows(x)
        out = self._score(x)
        return float(out[0]) if single else out

    # serialization hooks: JSON-able metadata plus named float arrays
    def get_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        raise NotImplementedError

    @classmethod
    def from_state(cls, config: ClassifierConfig, n_features: int, meta: dict,
                   arrays: dict[str, np.ndarray]) -> "TrainedModel":
        raise NotImplementedError
