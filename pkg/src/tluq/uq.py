"""Ensemble epistemic uncertainty.

An ensemble of one-hidden-layer MLPs, each with its own hidden width and
seed, is averaged into a mean predictive distribution; its entropy
``-sum_c p_c ln p_c`` (nats, ``0 ln 0 = 0``) is the uncertainty score. It is
0 for a confident unanimous prediction and ``ln 2`` for a binary coin flip.

Member ``i`` uses seed ``base_seed XOR splitmix64(i)``: its hidden width is
the first bounded draw of that stream and its MLP is fit with seed
``splitmix64(member_seed)``. Members therefore never depend on each other
or on worker scheduling.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import ClassifierConfig, TrainedModel, fit
from .data import LabeledDataset
from .rng import Rng, derive_seed, splitmix64
from .tensor import ShapeError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class EnsembleConfig:
    n_models: int = 20
    hidden_min: int = 50
    hidden_max: int = 400
    epochs: int = 200
    learning_rate: float = 0.01
    batch_size: int = 16
    base_seed: int = 0

    def __post_init__(self):
        if self.n_models < 2:
            raise ValueError("an ensemble needs at least two members")
        if not 1 <= self.hidden_min <= self.hidden_max:
            raise ValueError("need 1 <= hidden_min <= hidden_max")

    def member_seed(self, i: int) -> int:
        return derive_seed(self.base_seed, i)

    def hidden_units(self, i: int) -> int:
        return Rng(self.member_seed(i)).integers(self.hidden_min, self.hidden_max + 1)

    def member_config(self, i: int) -> ClassifierConfig:
        return ClassifierConfig("mlp", hidden_units=self.hidden_units(i), epochs=self.epochs,
                                learning_rate=self.learning_rate, batch_size=self.batch_size,
                                seed=splitmix64(self.member_seed(i)))


@dataclass
class Ensemble:
    members: list[tuple[int, TrainedModel]]

    @property
    def n_features(self) -> int:
        return self.members[0][1].n_features

    def __len__(self) -> int:
        return len(self.members)


def _fit_member(args):
    cfg, train = args
    return fit(cfg, train)


def build_ensemble(train: LabeledDataset, config: EnsembleConfig, jobs: int = 1) -> Ensemble:
    if len(np.unique(train.labels)) < 2:
        raise ValueError("ensemble training needs both classes")
    cfgs = [config.member_config(i) for i in range(config.n_models)]
    models: list[TrainedModel] = []
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                models = list(pool.map(_fit_member, [(c, train) for c in cfgs]))
        else:
            for c in cfgs:
                models.append(fit(c, train))
    except ValueError as exc:
        raise ValueError(f"ensemble member {len(models)}: {exc}") from exc
    return Ensemble([(c.hidden_units, m) for c, m in zip(cfgs, models)])


def member_probas(ensemble: Ensemble, x) -> np.ndarray:
    """Stacked member predictions, shape ``(n_members, n_rows, 2)``."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != ensemble.n_features:
        raise ShapeError(f"ensemble expects {ensemble.n_features} features, got {x.shape[1]}")
    return np.stack([m.predict_proba(x) for _, m in ensemble.members])


def mean_predictive(ensemble: Ensemble, x) -> np.ndarray:
    single = np.asarray(x).ndim == 1
    p = member_probas(ensemble, x).mean(axis=0)
    return p[0] if single else p


def predictive_entropy(p, atol: float = 1e-9):
    """Entropy in nats of one distribution (1-D) or of each row (2-D)."""
    p = np.asarray(p, dtype=np.float64)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    if np.any(p < -atol) or np.any(p > 1 + atol) or np.any(np.abs(p.sum(axis=1) - 1.0) > atol):
        raise ValueError("input is not a probability distribution")
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p), 0.0)
    h = terms.sum(axis=1)
    return float(h[0]) if single else h


@dataclass(frozen=True, eq=False)
class EntropyField:
    bounds: tuple[float, float, float, float]  # x_min, x_max, y_min, y_max
    resolution: tuple[int, int]  # nx, ny
    values: np.ndarray  # (ny, nx); row j is y-cell j counted from y_min

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        return cell_centers(self.bounds, self.resolution)


def cell_centers(bounds, resolution):
    x0, x1, y0, y1 = bounds
    nx, ny = resolution
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
    return xs, ys


def entropy_field(ensemble2d: Ensemble, bounds, resolution) -> EntropyField:
    if ensemble2d.n_features != 2:
        raise ValueError(f"entropy fields need an ensemble trained on 2 features, got {ensemble2d.n_features}")
    x0, x1, y0, y1 = (float(b) for b in bounds)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate bounds {bounds}")
    nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2x2")
    xs, ys = cell_centers((x0, x1, y0, y1), (nx, ny))
    gx, gy = np.meshgrid(xs, ys)
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    h = predictive_entropy(mean_predictive(ensemble2d, grid))
    return EntropyField((x0, x1, y0, y1), (nx, ny), h.reshape(ny, nx))


def padded_bounds(points: np.ndarray, pad: float = 0.1) -> tuple[float, float, float, float]:
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    lo, hi = lo - pad * span, hi + pad * span
    return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])


def save_field(field_: EntropyField, csv_path, json_path=None) -> None:
    """CSV grid (one line per y-cell, ``repr`` floats) plus a JSON sidecar with bounds and resolution."""
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    lines = [",".join(repr(float(v)) for v in row) for row in field_.values]
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = {"bounds": list(field_.bounds), "resolution": list(field_.resolution), "units": "nats",
            "layout": "rows are y cells from y_min upward; columns are x cells from x_min"}
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_field(csv_path, json_path=None) -> EntropyField:
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    meta = json.loads(json_path.read_text(encoding="utf-8"))
    rows = [[float(v) for v in line.split(",")] for line in csv_path.read_text(encoding="utf-8").splitlines()
            if line.strip()]
    values = np.array(rows)
    nx, ny = meta["resolution"]
    if values.shape != (ny, nx):
        raise ValueError(f"grid is {values.shape}, sidecar says {ny}x{nx}")
    return EntropyField(tuple(meta["bounds"]), (nx, ny), values)
