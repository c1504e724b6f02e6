"""Metrics, ROC/AUC and the repeated-split evaluation protocol.

Label 1 (Covid) is the positive class, so sensitivity is recall on label 1
and specificity recall on label 0. A ratio with a zero denominator is
``None`` in Python and ``"undefined"`` in serialized reports.

Run ``r`` of ``n_runs`` splits with seed ``base XOR splitmix64(r)`` and fits
with seed ``base XOR splitmix64(r + n_runs)``; the aggregated-prediction
hold-out uses ``base XOR splitmix64(2 * n_runs)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierConfig, fit
from .data import LabeledDataset, SplitSpec, split
from .rng import derive_seed
from .tensor import ShapeError

METRICS = ("accuracy", "sensitivity", "specificity", "auc")
UNDEFINED = "undefined"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


def confusion(labels, predictions) -> ConfusionMatrix:
    y = np.asarray(labels).astype(np.int64)
    p = np.asarray(predictions).astype(np.int64)
    if y.shape != p.shape or y.ndim != 1 or y.size < 1:
        raise ShapeError(f"labels {y.shape} and predictions {p.shape} must be equal-length non-empty vectors")
    return ConfusionMatrix(
        tp=int(np.sum((y == 1) & (p == 1))),
        fn=int(np.sum((y == 1) & (p == 0))),
        fp=int(np.sum((y == 0) & (p == 1))),
        tn=int(np.sum((y == 0) & (p == 0))),
    )


def _ratio(num: int, den: int):
    return num / den if den else None


def metrics(cm: ConfusionMatrix) -> tuple[float, float | None, float | None]:
    """``(accuracy, sensitivity, specificity)``."""
    if cm.total <= 0:
        raise ValueError("confusion matrix is empty")
    return (cm.tp + cm.tn) / cm.total, _ratio(cm.tp, cm.tp + cm.fn), _ratio(cm.tn, cm.tn + cm.fp)


def roc_auc(labels, scores) -> tuple[list[tuple[float, float]], float]:
    """ROC points ``(fpr, tpr)`` from a descending sweep over distinct scores, and trapezoid AUC.

    Samples with equal scores cross the threshold together, so a tie adds
    one diagonal segment and counts one half in the area.
    """
    y = np.asarray(labels).astype(np.int64)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise ShapeError(f"labels {y.shape} and scores {s.shape} must be equal-length vectors")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes among the labels")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), s.size - 1]  # end of each tie group
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    tpr = np.r_[0, tps] / n_pos
    fpr = np.r_[0, fps] / n_neg
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return [(float(a), float(b)) for a, b in zip(fpr, tpr)], auc


def pairwise_auc(labels, scores) -> float:
    """P(score+ > score-) + 1/2 P(tie), by enumerating every positive-negative pair."""
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    pos, neg = s[y == 1], s[y == 0]
    wins = 0.0
    for a in pos:
        for b in neg:
            wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def boxplot_stats(values) -> dict:
    """Five-number summary with Type-7 quartiles, Tukey whiskers at 1.5 IQR and the outliers."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("boxplot_stats needs at least one value")
    q1, med, q3 = (float(q) for q in np.quantile(v, [0.25, 0.5, 0.75]))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    return {
        "min": float(v.min()), "q1": q1, "median": med, "q3": q3, "max": float(v.max()),
        "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
        "outliers": sorted(float(x) for x in v[(v < lo_fence) | (v > hi_fence)]),
    }


def summarize(values) -> dict:
    """Mean, sample std (ddof=1; 0 for one value) and quartiles over the defined entries."""
    defined = [float(v) for v in values if v is not None]
    out = {"n": len(values), "n_undefined": len(values) - len(defined)}
    if not defined:
        out.update({k: None for k in ("mean", "std", "min", "q1", "median", "q3", "max")})
        return out
    v = np.array(defined)
    q1, med, q3 = (float(q) for q in np.quantile(v, [0.25, 0.5, 0.75]))
    out.update({
        "mean": float(np.mean(v)),
        "std": float(np.std(v, ddof=1)) if v.size > 1 else 0.0,
        "min": float(v.min()), "q1": q1, "median": med, "q3": q3, "max": float(v.max()),
    })
    return out


@dataclass
class RunStats:
    values: dict[str, list]  # metric -> per-run values (None = undefined)
    summary: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = {m: summarize(v) for m, v in self.values.items()}

    @property
    def n_runs(self) -> int:
        return len(next(iter(self.values.values())))

    def to_dict(self) -> dict:
        return {"values": {m: [UNDEFINED if v is None else v for v in vals] for m, vals in self.values.items()},
                "summary": self.summary}

    @classmethod
    def from_dict(cls, d: dict) -> "RunStats":
        values = {m: [None if v == UNDEFINED else v for v in vals] for m, vals in d["values"].items()}
        return cls(values, d["summary"])


def score_split(model, test: LabeledDataset) -> dict:
    pred = model.predict_label(test.features)
    acc, sens, spec = metrics(confusion(test.labels, pred))
    scores = model.decision_score(test.features)
    auc = roc_auc(test.labels, scores)[1] if 0 < test.labels.sum() < test.n_samples else None
    return {"accuracy": acc, "sensitivity": sens, "specificity": spec, "auc": auc,
            "labels": test.labels, "scores": np.asarray(scores, dtype=np.float64)}


def single_run(ds: LabeledDataset, classifier: ClassifierConfig, split_spec: SplitSpec, run: int,
               n_runs: int, base_seed: int) -> dict:
    try:
        spec = SplitSpec(split_spec.test_fraction, split_spec.stratified, derive_seed(base_seed, run))
        train, test = split(ds, spec)
        model = fit(classifier.replace(seed=derive_seed(base_seed, run + n_runs)), train)
        return score_split(model, test)
    except ValueError as exc:
        raise ValueError(f"run {run}: {exc}") from exc


def _run_job(args):
    return single_run(*args)


def map_jobs(fn, items, jobs: int = 1) -> list:
    """Ordered map, in-process or over a process pool."""
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def repeated_runs(ds: LabeledDataset, classifier: ClassifierConfig, split_spec: SplitSpec,
                  n_runs: int = 100, base_seed: int = 0, jobs: int = 1, keep_runs: bool = False):
    """Train and score ``n_runs`` times on fresh seeded splits.

    Returns a :class:`RunStats`; with ``keep_runs`` also the raw per-run
    dicts (labels and scores included) in run order.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    runs = map_jobs(_run_job, [(ds, classifier, split_spec, r, n_runs, base_seed) for r in range(n_runs)], jobs)
    stats = RunStats({m: [run[m] for run in runs] for m in METRICS})
    return (stats, runs) if keep_runs else stats


def aggregate_predictions(per_run_probas) -> np.ndarray:
    """Average each sample's class distribution over runs, then argmax (ties go to class 0)."""
    try:
        p = np.asarray(per_run_probas, dtype=np.float64)
    except ValueError:
        raise ValueError("runs cover different numbers of samples") from None
    if p.ndim != 3 or p.shape[2] != 2 or p.shape[0] < 1:
        raise ValueError(f"expected (runs, samples, 2) probabilities, got shape {p.shape}")
    mean = p.mean(axis=0)
    return (mean[:, 1] > mean[:, 0]).astype(np.int64)


def _holdout_job(args):
    train, test, classifier, seed = args
    return fit(classifier.replace(seed=seed), train).predict_proba(test.features)


def aggregated_evaluation(ds: LabeledDataset, classifier: ClassifierConfig, split_spec: SplitSpec,
                          n_runs: int = 100, base_seed: int = 0, jobs: int = 1) -> dict:
    """Metrics of run-averaged predictions on one fixed seeded hold-out set."""
    spec = SplitSpec(split_spec.test_fraction, split_spec.stratified, derive_seed(base_seed, 2 * n_runs))
    train, test = split(ds, spec)
    probas = map_jobs(_holdout_job, [(train, test, classifier, derive_seed(base_seed, r + n_runs))
                                     for r in range(n_runs)], jobs)
    labels = aggregate_predictions(probas)
    acc, sens, spec_ = metrics(confusion(test.labels, labels))
    mean_p1 = np.mean([p[:, 1] for p in probas], axis=0)
    auc = roc_auc(test.labels, mean_p1)[1] if 0 < test.labels.sum() < test.n_samples else None
    return {"accuracy": acc, "sensitivity": sens, "specificity": spec_, "auc": auc,
            "holdout_ids": list(test.ids), "n_runs": n_runs}


def json_safe(value):
    """Replace ``None`` metrics by the ``"undefined"`` sentinel and non-finite floats by strings."""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if value is None:
        return UNDEFINED
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, np.integer):
        return int(value)
    return value
