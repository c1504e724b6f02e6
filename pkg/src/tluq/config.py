"""Pipeline configuration.

A config file is INI-style ``key = value`` text with bracketed sections::

    [run]
    seed = 7

    [data]
    synthetic = 25, 75, 100, 6.0

    [classifiers]
    classifiers = linear_svm, mlp, gnb

Section names only group keys; every key is unique across sections and is
also a command-line flag of the same name (``n_runs`` -> ``--n-runs``).
Precedence is defaults < file < flags.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .classifiers import KINDS, ClassifierConfig
from .data import SplitSpec
from .uq import EnsembleConfig


class ConfigError(ValueError):
    pass


def _section(name: str, **kw):
    return field(metadata={"section": name}, **kw)


@dataclass
class PipelineConfig:
    # run
    seed: int = _section("run", default=0)
    out: str = _section("run", default="out")
    jobs: int = _section("run", default=1)
    # data: exactly one of features / synthetic / images
    features: list = _section("data", default_factory=list)
    synthetic: str = _section("data", default="")
    images: str = _section("data", default="")
    architecture: str = _section("data", default="vgg16")
    weights: str = _section("data", default="random")
    extract_batch: int = _section("data", default=8)
    # classifiers
    classifiers: list = _section("classifiers", default_factory=lambda: list(KINDS))
    k: int = _section("classifiers", default=2)
    minkowski_p: float = _section("classifiers", default=2.0)
    sigma: float = _section("classifiers", default=1.0)
    c_penalty: float = _section("classifiers", default=1.0)
    unsquared_norm: bool = _section("classifiers", default=False)
    hidden_units: int = _section("classifiers", default=100)
    epochs: int = _section("classifiers", default=200)
    learning_rate: float = _section("classifiers", default=0.01)
    batch_size: int = _section("classifiers", default=16)
    n_trees: int = _section("classifiers", default=10)
    n_weak: int = _section("classifiers", default=50)
    # evaluation
    n_runs: int = _section("evaluation", default=100)
    test_fraction: float = _section("evaluation", default=0.2)
    stratified: bool = _section("evaluation", default=True)
    aggregated: bool = _section("evaluation", default=True)
    # uncertainty
    n_models: int = _section("uncertainty", default=20)
    hidden_min: int = _section("uncertainty", default=50)
    hidden_max: int = _section("uncertainty", default=400)
    ensemble_epochs: int = _section("uncertainty", default=200)
    pca: bool = _section("uncertainty", default=True)
    resolution: int = _section("uncertainty", default=100)
    pad: float = _section("uncertainty", default=0.1)

    # execution-only keys: they change where and how fast, never what
    EXECUTION_KEYS = ("out", "jobs")

    def validate(self, check_files: bool = True) -> "PipelineConfig":
        given = [bool(self.features), bool(self.synthetic), bool(self.images)]
        if sum(given) != 1:
            raise ConfigError("exactly one feature source is required: features, synthetic or images")
        if self.synthetic:
            self.synthetic_spec()
        unknown = [c for c in self.classifiers if c not in KINDS]
        if unknown or not self.classifiers:
            raise ConfigError(f"unknown classifiers {unknown}; choose from {', '.join(KINDS)}")
        if len(set(self.classifiers)) != len(self.classifiers):
            raise ConfigError("classifier list has duplicates")
        if self.jobs < 1 or self.n_runs < 1:
            raise ConfigError("jobs and n_runs must be positive")
        if self.resolution < 2:
            raise ConfigError("resolution must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        try:
            self.split_spec()
            self.ensemble_config()
            self.classifier_config(self.classifiers[0])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if check_files:
            paths = list(self.features)
            if self.images:
                paths.append(self.images)
                if self.weights != "random":
                    paths.append(self.weights)
                if self.architecture.endswith(".txt") or "/" in self.architecture:
                    paths.append(self.architecture)
            for p in paths:
                if not Path(p).exists():
                    raise FileNotFoundError(f"no such file or directory: {p}")
        return self

    def synthetic_spec(self) -> tuple[int, int, int, float]:
        parts = [p.strip() for p in self.synthetic.split(",")]
        try:
            n_pos, n_neg, dim, sep = int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])
        except (ValueError, IndexError):
            raise ConfigError(f"synthetic must be 'n_pos, n_neg, dim, separation', got {self.synthetic!r}") from None
        if len(parts) != 4:
            raise ConfigError(f"synthetic takes four values, got {len(parts)}")
        return n_pos, n_neg, dim, sep

    def classifier_config(self, kind: str) -> ClassifierConfig:
        return ClassifierConfig(kind, k=self.k, minkowski_p=self.minkowski_p, sigma=self.sigma,
                                c_penalty=self.c_penalty, unsquared_norm=self.unsquared_norm,
                                hidden_units=self.hidden_units, epochs=self.epochs,
                                learning_rate=self.learning_rate, batch_size=self.batch_size,
                                n_trees=self.n_trees, n_weak=self.n_weak, seed=self.seed)

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.test_fraction, self.stratified, self.seed)

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(n_models=self.n_models, hidden_min=self.hidden_min, hidden_max=self.hidden_max,
                              epochs=self.ensemble_epochs, learning_rate=self.learning_rate,
                              batch_size=self.batch_size, base_seed=self.seed)

    def to_dict(self, include_execution: bool = True) -> dict:
        d = dataclasses.asdict(self)
        if not include_execution:
            for k in self.EXECUTION_KEYS:
                d.pop(k)
        return d

    def to_ini(self) -> str:
        sections: dict[str, list[str]] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            text = ", ".join(map(str, v)) if isinstance(v, list) else str(v).lower() if isinstance(v, bool) else v
            sections.setdefault(f.metadata["section"], []).append(f"{f.name} = {text}")
        return "\n".join(f"[{s}]\n" + "\n".join(lines) + "\n" for s, lines in sections.items())


FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}
SECTIONS = sorted({f.metadata["section"] for f in fields(PipelineConfig)})


def coerce(key: str, text: str):
    """Parse one textual value into the type of ``key``."""
    kind = FIELD_TYPES[key]
    text = text.strip()
    try:
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "int":
            return int(text, 0)
        if kind == "float":
            return float(text)
        if kind == "list":
            items = [t.strip() for t in text.split(",") if t.strip()]
            return list(KINDS) if key == "classifiers" and items == ["all"] else items
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {kind}") from None
    return text


def parse_config(text: str, source: str = "<config>") -> dict:
    """Values set by a config file, keyed by field name."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__",
                                       inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in FIELD_TYPES:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            values[key] = coerce(key, raw)
    return values


def load_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    values = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"no such config file: {p}")
        values.update(parse_config(p.read_text(encoding="utf-8"), str(p)))
    values.update(overrides or {})
    return PipelineConfig(**values)
