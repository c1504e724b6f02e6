"""The eight binary classifiers behind one fit / predict contract.

>>> model = fit(ClassifierConfig("gnb"), dataset)
>>> model.predict_proba(row)        # (P(0), P(1))
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from ..data import LabeledDataset
from ..extractor import FormatError, _Reader, read_tensors, write_tensors
from .adaboost import AdaBoostModel, fit_adaboost
from .base import KINDS, ClassifierConfig, TrainedModel, logistic
from .forest import RandomForestModel, fit_random_forest
from .gnb import GNBModel, fit_gnb
from .gp import GPModel, fit_gp
from .kernels import minkowski_distance, rbf_kernel
from .knn import KNNModel, fit_knn
from .mlp import MLPModel, fit_mlp
from .svm import LinearSVMModel, RBFSVMModel, fit_linear_svm, fit_rbf_svm
from .base import check_training

_FITTERS = {
    "knn": fit_knn,
    "linear_svm": fit_linear_svm,
    "rbf_svm": fit_rbf_svm,
    "gp": fit_gp,
    "mlp": fit_mlp,
    "random_forest": fit_random_forest,
    "adaboost": fit_adaboost,
    "gnb": fit_gnb,
}

MODEL_CLASSES = {cls.kind: cls for cls in (KNNModel, LinearSVMModel, RBFSVMModel, GPModel, MLPModel,
                                           RandomForestModel, AdaBoostModel, GNBModel)}

CMDL_MAGIC = b"CMDL"
CMDL_VERSION = 1


def fit(config: ClassifierConfig, train: LabeledDataset) -> TrainedModel:
    x, y = check_training(train.features, train.labels, config.kind)
    return _FITTERS[config.kind](config, x, y)


def predict_proba(model: TrainedModel, x) -> np.ndarray:
    return model.predict_proba(x)


def predict_label(model: TrainedModel, x):
    return model.predict_label(x)


def decision_score(model: TrainedModel, x):
    return model.decision_score(x)


def save_model(model: TrainedModel, path) -> None:
    """CMDL container: magic, u32 version, u32 JSON length, JSON header, then FZWT-framed tensors."""
    meta, arrays = model.get_state()
    header = json.dumps({"kind": model.kind, "n_features": model.n_features,
                         "config": model.config.to_dict(), "meta": meta}, sort_keys=True).encode()
    buf = io.BytesIO()
    buf.write(CMDL_MAGIC)
    buf.write(struct.pack("<II", CMDL_VERSION, len(header)))
    buf.write(header)
    write_tensors(buf, {k: np.asarray(v, dtype=np.float64) for k, v in arrays.items()})
    Path(path).write_bytes(buf.getvalue())


def load_model(path) -> TrainedModel:
    data = Path(path).read_bytes()
    reader = _Reader(data)
    magic = reader.take(4, "magic")
    if magic != CMDL_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {CMDL_MAGIC!r}", 0, "magic")
    version, hlen = reader.unpack("<II", "version")
    if version != CMDL_VERSION:
        raise FormatError(f"unsupported version {version}", 4, "version")
    start = reader.pos
    try:
        header = json.loads(reader.take(hlen, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable model header: {exc}", start, "header") from None
    arrays = read_tensors(reader)
    if reader.pos != len(data):
        raise FormatError("trailing bytes after last tensor", reader.pos, "eof")
    config = ClassifierConfig(**header["config"])
    cls = MODEL_CLASSES[header["kind"]]
    return cls.from_state(config, header["n_features"], header["meta"], arrays)


__all__ = [
    "KINDS", "ClassifierConfig", "TrainedModel", "fit", "predict_proba", "predict_label", "decision_score",
    "minkowski_distance", "rbf_kernel", "logistic", "save_model", "load_model", "MODEL_CLASSES",
]
