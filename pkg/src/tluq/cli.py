"""Command-line entry point: ``tluq {extract,evaluate,uncertainty,report}``.

Exit codes: 0 success, 1 an evaluation or training step failed, 2 bad input
(config, file format, shapes, missing files).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .classifiers import ClassifierConfig
from .config import ConfigError, PipelineConfig, coerce, load_config
from .data import LabeledDataset, ParseError, load_feature_csv, save_feature_csv, split, synth_gaussian
from .evaluation import aggregated_evaluation, json_safe, roc_auc, repeated_runs
from .extractor import (ExtractionError, FormatError, extract_features, load_architecture, load_weights,
                        preprocess, random_weights, read_pnm)
from .plots import render_svg
from .reduction import fit_pca, transform
from .report import SCHEMA_VERSION, load_report, render_figures, write_all, write_runs, write_table
from .tensor import ShapeError
from .uq import LN2, build_ensemble, entropy_field, mean_predictive, padded_bounds, predictive_entropy, save_field

IMAGE_SUFFIXES = (".pgm", ".ppm", ".pnm")
INPUT_ERRORS = (ConfigError, FormatError, ParseError, ExtractionError, ShapeError, FileNotFoundError,
                NotADirectoryError, PermissionError)


# ---------------------------------------------------------------- feature sources

def read_image_dir(root, arch) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Images under ``root/0`` (non-Covid) and ``root/1`` (Covid), sorted by name."""
    root = Path(root)
    images, labels, ids = [], [], []
    for label in (0, 1):
        sub = root / str(label)
        if not sub.is_dir():
            raise FileNotFoundError(f"missing class directory {sub}")
        for path in sorted(p for p in sub.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES):
            pixels, maxval = read_pnm(path)
            images.append(preprocess(pixels, tuple(arch.input_size), maxval, arch.in_channels))
            labels.append(label)
            ids.append(f"{label}/{path.name}")
    if not images:
        raise FileNotFoundError(f"no .pgm/.ppm images under {root}/0 or {root}/1")
    return np.stack(images), np.array(labels), tuple(ids)


def extract_dataset(cfg: PipelineConfig) -> tuple[str, LabeledDataset]:
    arch = load_architecture(cfg.architecture)
    weights = random_weights(arch, cfg.seed) if cfg.weights == "random" else load_weights(cfg.weights)
    x, y, ids = read_image_dir(cfg.images, arch)
    feats = extract_features(x, arch, weights, batch_size=cfg.extract_batch)
    return arch.name, LabeledDataset(feats, y, ids)


def load_sources(cfg: PipelineConfig) -> dict[str, LabeledDataset]:
    if cfg.synthetic:
        n_pos, n_neg, dim, sep = cfg.synthetic_spec()
        return {"synthetic": synth_gaussian(n_pos, n_neg, dim, sep, seed=cfg.seed)}
    if cfg.images:
        name, ds = extract_dataset(cfg)
        return {name: ds}
    sources = {}
    for p in cfg.features:
        name = Path(p).stem
        if name in sources:
            raise ConfigError(f"two feature files share the source name {name!r}")
        sources[name] = load_feature_csv(p)
    return sources


# ---------------------------------------------------------------- commands

def cmd_extract(cfg: PipelineConfig) -> int:
    if not cfg.images:
        raise ConfigError("extract needs an image directory (images = DIR)")
    name, ds = extract_dataset(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"features_{name}.csv"
    save_feature_csv(ds, path)
    print(f"wrote {ds.n_samples} x {ds.n_features} features to {path}")
    return 0


def evaluate_pair(ds: LabeledDataset, clf: ClassifierConfig, cfg: PipelineConfig) -> dict:
    stats, runs = repeated_runs(ds, clf, cfg.split_spec(), n_runs=cfg.n_runs, base_seed=cfg.seed,
                                jobs=cfg.jobs, keep_runs=True)
    points, auc = roc_auc(runs[0]["labels"], runs[0]["scores"])
    result = {"status": "ok", "runs": stats.to_dict(),
              "roc": {"run": 0, "points": [list(p) for p in points], "auc": auc}}
    if cfg.aggregated:
        result["aggregated"] = aggregated_evaluation(ds, clf, cfg.split_spec(), n_runs=cfg.n_runs,
                                                     base_seed=cfg.seed, jobs=cfg.jobs)
    return result


def build_report(cfg: PipelineConfig, sources: dict[str, LabeledDataset]) -> dict:
    results = []
    for source, ds in sources.items():
        for kind in cfg.classifiers:
            entry = {"source": source, "classifier": kind}
            try:
                entry.update(evaluate_pair(ds, cfg.classifier_config(kind), cfg))
            except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                entry.update({"status": "failed", "error": str(exc)})
            results.append(entry)
    return json_safe({
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(include_execution=False),
        "classifiers": {k: cfg.classifier_config(k).to_dict() for k in cfg.classifiers},
        "sources": list(sources),
        "results": results,
    })


def cmd_evaluate(cfg: PipelineConfig) -> int:
    report = build_report(cfg, load_sources(cfg))
    write_all(report, cfg.out)
    failed = [f"{r['source']}/{r['classifier']}: {r['error']}" for r in report["results"] if r["status"] != "ok"]
    print(Path(cfg.out, "table.csv").read_text(encoding="utf-8"), end="")
    for line in failed:
        print(f"failed {line}", file=sys.stderr)
    return 1 if failed else 0


def uncertainty_for_source(name: str, ds: LabeledDataset, cfg: PipelineConfig, out: Path) -> dict:
    ens_cfg = cfg.ensemble_config()
    train, test = split(ds, cfg.split_spec())
    summary = {"source": name, "hidden_units": [ens_cfg.hidden_units(i) for i in range(ens_cfg.n_models)]}

    ens = build_ensemble(train, ens_cfg, jobs=cfg.jobs)
    p = mean_predictive(ens, test.features)
    h = predictive_entropy(p)
    with (out / f"{name}_sample_entropy.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", "p0", "p1", "entropy"])
        for i in range(test.n_samples):
            w.writerow([test.ids[i], int(test.labels[i]), repr(float(p[i, 0])), repr(float(p[i, 1])),
                        repr(float(h[i]))])
    correct = (p[:, 1] > 0.5).astype(int) == test.labels
    summary["test_entropy"] = {"mean": float(h.mean()), "max": float(h.max()),
                               "mean_correct": float(h[correct].mean()) if correct.any() else None,
                               "mean_wrong": float(h[~correct].mean()) if (~correct).any() else None}

    if cfg.pca:
        pca = fit_pca(ds.features, 2)
        z = transform(pca, ds.features)
        bounds = padded_bounds(z, cfg.pad)
        # the 2-D ensemble sees every sample, as the field is a map of the whole dataset
        ens2 = build_ensemble(ds.with_features(z), ens_cfg, jobs=cfg.jobs)
        field_ = entropy_field(ens2, bounds, (cfg.resolution, cfg.resolution))
        save_field(field_, out / f"{name}_entropy_field.csv")
        pts = [(a, b, int(c)) for (a, b), c in zip(z, ds.labels)]
        render_svg("heatmap", {"values": field_.values, "bounds": bounds, "vmax": LN2, "points": pts,
                               "title": f"{name}: ensemble predictive entropy (nats)"},
                   out / f"{name}_entropy_heatmap.svg")
        render_svg("scatter", {"points": pts, "bounds": bounds, "title": f"{name}: first two principal components"},
                   out / f"{name}_pca_scatter.svg")
        summary["field"] = {"bounds": list(bounds), "resolution": [cfg.resolution, cfg.resolution],
                            "min": float(field_.values.min()), "max": float(field_.values.max()),
                            "explained_variance": pca.explained_variance.tolist()}
    return summary


def cmd_uncertainty(cfg: PipelineConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summaries, failed = [], False
    for name, ds in load_sources(cfg).items():
        try:
            summaries.append(uncertainty_for_source(name, ds, cfg, out))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            if isinstance(exc, INPUT_ERRORS):
                raise
            summaries.append({"source": name, "status": "failed", "error": str(exc)})
            print(f"failed {name}: {exc}", file=sys.stderr)
            failed = True
    doc = json_safe({"schema_version": SCHEMA_VERSION, "config": cfg.to_dict(include_execution=False),
                     "sources": summaries})
    (out / "uncertainty.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote uncertainty outputs to {out}")
    return 1 if failed else 0


def cmd_report(cfg: PipelineConfig, report_path: str | None) -> int:
    out = Path(cfg.out)
    path = Path(report_path) if report_path else out / "report.json"
    if not path.exists():
        raise FileNotFoundError(f"no such report: {path}")
    try:
        report = load_report(path)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    out.mkdir(parents=True, exist_ok=True)
    write_table(report, out / "table.csv")
    write_runs(report, out / "runs.csv")
    render_figures(report, out)
    print((out / "table.csv").read_text(encoding="utf-8"), end="")
    return 1 if any(r["status"] != "ok" for r in report["results"]) else 0


# ---------------------------------------------------------------- argument parsing

def _config_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", default=argparse.SUPPRESS, help="INI config file")
    for f in fields(PipelineConfig):
        parent.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=argparse.SUPPRESS,
                            metavar=f.type.upper(), help=f"[{f.metadata['section']}] {f.name}")
    return parent


def build_parser() -> argparse.ArgumentParser:
    flags = _config_flags()
    parser = argparse.ArgumentParser(prog="tluq", parents=[flags],
                                     description="Deep-feature classification and ensemble uncertainty pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("extract", parents=[flags], help="images -> feature CSV")
    sub.add_parser("evaluate", parents=[flags], help="repeated-split evaluation, report and plots")
    sub.add_parser("uncertainty", parents=[flags], help="ensemble entropy field and per-sample entropies")
    rep = sub.add_parser("report", parents=[flags], help="re-render tables and plots from report.json")
    rep.add_argument("--report", default=None, help="report path (default OUT/report.json)")
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    names = {f.name for f in fields(PipelineConfig)}
    overrides = {k: coerce(k, v) for k, v in vars(args).items() if k in names}
    return load_config(getattr(args, "config", None), overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "report":
            return cmd_report(cfg, args.report)
        cfg.validate()
        return {"extract": cmd_extract, "evaluate": cmd_evaluate, "uncertainty": cmd_uncertainty}[args.command](cfg)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
