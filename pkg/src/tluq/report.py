"""Evaluation report: JSON document, flat CSV tables and SVG figures.

``report.json`` (schema version 1) holds::

    schema_version   1
    config           effective pipeline config, defaults included
                     (execution-only keys ``out`` and ``jobs`` left out)
    classifiers      ClassifierConfig of every evaluated kind
    sources          feature-source names in evaluation order
    results          one entry per (source, classifier):
        source, classifier, status ("ok" or "failed"), error (failed only)
        runs         {"values": metric -> per-run list, "summary": metric -> stats}
        aggregated   metrics of run-averaged predictions on a fixed hold-out
        roc          {"run": 0, "points": [[fpr, tpr], ...], "auc": float}

Undefined ratios are the string ``"undefined"``. Keys are sorted and floats
written with ``repr``, so equal results give equal bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .evaluation import METRICS, UNDEFINED, RunStats
from .plots import render_svg

SCHEMA_VERSION = 1


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_report(path) -> dict:
    report = json.loads(Path(path).read_text(encoding="utf-8"))
    if report.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported report schema {report.get('schema_version')!r}")
    return report


def _cell(summary: dict) -> str:
    mean, std = summary.get("mean"), summary.get("std")
    if mean in (None, UNDEFINED):
        return UNDEFINED
    return f"{100 * mean:.2f} ± {100 * std:.2f}"


def write_table(report: dict, path) -> None:
    """Mean ± std in percent per metric, one row per (source, classifier)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "classifier", *METRICS])
        for r in report["results"]:
            if r["status"] != "ok":
                w.writerow([r["source"], r["classifier"], *["failed"] * len(METRICS)])
                continue
            w.writerow([r["source"], r["classifier"], *(_cell(r["runs"]["summary"][m]) for m in METRICS)])


def write_runs(report: dict, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "classifier", "run", *METRICS])
        for r in report["results"]:
            if r["status"] != "ok":
                continue
            vals = r["runs"]["values"]
            for i in range(len(vals[METRICS[0]])):
                w.writerow([r["source"], r["classifier"], i,
                            *(v if v == UNDEFINED else repr(float(v)) for v in (vals[m][i] for m in METRICS))])


def render_figures(report: dict, out_dir) -> list[Path]:
    """Box plot per (source, metric) and one ROC chart per source."""
    out_dir = Path(out_dir)
    written = []
    for source in report["sources"]:
        ok = [r for r in report["results"] if r["source"] == source and r["status"] == "ok"]
        if not ok:
            continue
        for m in METRICS:
            groups = [(r["classifier"], RunStats.from_dict(r["runs"]).values[m]) for r in ok]
            path = out_dir / f"boxplot_{source}_{m}.svg"
            render_svg("boxplot", {"groups": groups, "title": f"{source}: {m}", "ylabel": m}, path)
            written.append(path)
        curves = [(r["classifier"], r["roc"]["points"], r["roc"]["auc"]) for r in ok]
        path = out_dir / f"roc_{source}.svg"
        render_svg("roc", {"curves": curves, "title": f"{source}: ROC (run 0)"}, path)
        written.append(path)
    return written


def write_all(report: dict, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(dumps(report), encoding="utf-8")
    write_table(report, out_dir / "table.csv")
    write_runs(report, out_dir / "runs.csv")
    render_figures(report, out_dir)
