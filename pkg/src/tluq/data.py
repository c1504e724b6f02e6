"""Labelled feature tables: CSV ingestion, stratified splits, synthetic data.

Feature CSV layout: header ``id,f0,f1,...,f{d-1},label``, UTF-8, ``.``
decimal separator, label column last with values 0 or 1. Label 1 is the
positive (Covid) class.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import Rng


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError(f"features must be a non-empty 2-D table, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        if y.shape != (x.shape[0],):
            raise ValueError(f"{y.shape[0] if y.ndim else 0} labels for {x.shape[0]} feature rows")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        ids = tuple(str(i) for i in self.ids)
        if len(ids) != x.shape[0]:
            raise ValueError(f"{len(ids)} ids for {x.shape[0]} rows")
        x = x.copy()
        x.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_arrays(cls, x, y, ids=None) -> "LabeledDataset":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if ids is None:
            ids = [f"s{i}" for i in range(x.shape[0])]
        return cls(x, np.asarray(y), tuple(ids))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def counts(self) -> tuple[int, int]:
        """(negatives, positives)."""
        pos = int(self.labels.sum())
        return self.n_samples - pos, pos

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], tuple(self.ids[i] for i in idx))

    def with_features(self, x) -> "LabeledDataset":
        return LabeledDataset(np.asarray(x, dtype=np.float64), self.labels, self.ids)

    def relabeled(self) -> "LabeledDataset":
        """Same rows with classes 0 and 1 swapped."""
        return LabeledDataset(self.features, 1 - self.labels, self.ids)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")


def load_feature_csv(path) -> LabeledDataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file, missing header", 1)
        if len(header) < 3 or header[0] != "id" or header[-1] != "label":
            raise ParseError("header must read id,f0,...,label", 1)
        expected = [f"f{i}" for i in range(len(header) - 2)]
        if header[1:-1] != expected:
            raise ParseError(f"feature columns must be named f0..f{len(expected) - 1}", 1)
        width = len(header)
        ids, rows, labels = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"expected {width} cells, found {len(row)}", lineno)
            try:
                values = [float(cell) for cell in row[1:-1]]
            except ValueError as exc:
                raise ParseError(f"non-numeric feature cell: {exc}", lineno) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite feature value", lineno)
            if row[-1].strip() not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {row[-1]!r}", lineno)
            ids.append(row[0])
            rows.append(values)
            labels.append(int(row[-1]))
    if not rows:
        raise ParseError("no data rows")
    return LabeledDataset(np.array(rows), np.array(labels), tuple(ids))


def save_feature_csv(ds: LabeledDataset, path) -> None:
    """Write with ``repr`` floats so values round-trip exactly."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"f{i}" for i in range(ds.n_features)] + ["label"])
        for i in range(ds.n_samples):
            writer.writerow([ds.ids[i]] + [repr(float(v)) for v in ds.features[i]] + [int(ds.labels[i])])


def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded train/test partition.

    Stratified mode shuffles each class separately and sends
    ``round(test_fraction * class_count)`` of it to the test side.
    """
    rng = Rng(spec.seed)
    if spec.stratified:
        test_idx = []
        for cls in (0, 1):
            members = np.flatnonzero(ds.labels == cls)
            if members.size == 0:
                raise ValueError(f"stratified split needs both classes; class {cls} is absent")
            order = members[rng.permutation(members.size)]
            n_test = int(math.floor(spec.test_fraction * members.size + 0.5))
            test_idx.extend(order[:n_test].tolist())
        test_idx = np.array(sorted(test_idx), dtype=np.int64)
    else:
        n_test = int(math.floor(spec.test_fraction * ds.n_samples + 0.5))
        test_idx = np.sort(rng.permutation(ds.n_samples)[:n_test])
    mask = np.zeros(ds.n_samples, dtype=bool)
    mask[test_idx] = True
    if mask.all() or not mask.any():
        side = "train" if mask.all() else "test"
        raise ValueError(f"test_fraction {spec.test_fraction} leaves the {side} side empty "
                         f"for {ds.n_samples} samples")
    return ds.subset(np.flatnonzero(~mask)), ds.subset(np.flatnonzero(mask))


def synth_gaussian(n_pos: int, n_neg: int, dim: int, separation: float, seed: int) -> LabeledDataset:
    """Two isotropic unit Gaussians whose means sit +/- separation/2 along the diagonal.

    Draw order: all positive rows first, then negatives, row-major, from one
    Box-Muller stream of ``Rng(seed)``. Positives get label 1 and ids
    ``p0, p1, ...``; negatives ``n0, n1, ...``.
    """
    if n_pos < 1 or n_neg < 1 or dim < 1:
        raise ValueError("n_pos, n_neg and dim must all be at least 1")
    if separation < 0:
        raise ValueError("separation must be non-negative")
    rng = Rng(seed)
    noise = rng.normal((n_pos + n_neg, dim))
    shift = separation / 2.0 / math.sqrt(dim)
    x = noise.copy()
    x[:n_pos] += shift
    x[n_pos:] -= shift
    y = np.r_[np.ones(n_pos, dtype=np.int64), np.zeros(n_neg, dtype=np.int64)]
    ids = tuple(f"p{i}" for i in range(n_pos)) + tuple(f"n{i}" for i in range(n_neg))
    return LabeledDataset(x, y, ids)
