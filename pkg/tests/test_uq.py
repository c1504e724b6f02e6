import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tluq.classifiers import ClassifierConfig
from tluq.classifiers.base import TrainedModel
from tluq.data import synth_gaussian
from tluq.tensor import ShapeError
from tluq.uq import (LN2, Ensemble, EnsembleConfig, EntropyField, build_ensemble, entropy_field, load_field,
                     mean_predictive, member_probas, predictive_entropy, save_field)


class Const(TrainedModel):
    """Test double returning a fixed or position-dependent P(class 1)."""

    kind = "mlp"

    def __init__(self, p1, n_features=2):
        super().__init__(ClassifierConfig("mlp"), n_features)
        self.p1 = p1

    def _proba1(self, x):
        return self.p1(x) if callable(self.p1) else np.full(x.shape[0], float(self.p1))


def ens(*p1s):
    return Ensemble([(50, Const(p)) for p in p1s])


probs = st.floats(0, 1, allow_nan=False)


# entropy

def test_entropy_worked_values():
    assert abs(predictive_entropy([0.6, 0.4]) - 0.673012) < 1e-6
    assert predictive_entropy([1.0, 0.0]) == 0.0
    assert abs(predictive_entropy([0.5, 0.5]) - math.log(2)) < 1e-12


def test_entropy_rejects_non_distribution():
    for bad in ([0.7, 0.7], [-0.1, 1.1], [0.2, 0.2, 0.2]):
        with pytest.raises(ValueError):
            predictive_entropy(bad)


def test_entropy_rows():
    h = predictive_entropy(np.array([[1.0, 0.0], [0.5, 0.5]]))
    assert h.tolist() == [0.0, math.log(2)]


@given(st.lists(probs, min_size=2, max_size=5).filter(lambda v: sum(v) > 0), st.randoms())
@settings(max_examples=80, deadline=None)
def test_entropy_permutation_invariant(raw, rnd):
    p = np.array(raw) / sum(raw)
    q = p.copy()
    rnd.shuffle(q)
    assert abs(predictive_entropy(p) - predictive_entropy(q)) < 1e-12


@given(probs, probs, probs)
@settings(max_examples=100, deadline=None)
def test_entropy_concave(a, b, alpha):
    p, q = np.array([a, 1 - a]), np.array([b, 1 - b])
    mix = alpha * p + (1 - alpha) * q
    assert predictive_entropy(mix) >= alpha * predictive_entropy(p) + (1 - alpha) * predictive_entropy(q) - 1e-12


@given(st.lists(probs, min_size=2, max_size=8))
@settings(max_examples=100, deadline=None)
def test_mean_predictive_jensen(p1s):
    e = ens(*p1s)
    x = np.zeros((1, 2))
    h_mean = predictive_entropy(mean_predictive(e, x))[0]
    members = [predictive_entropy(np.array([1 - p, p])) for p in p1s]
    assert h_mean >= np.mean(members) - 1e-12


# mean predictive

def test_mean_predictive_examples():
    assert np.allclose(mean_predictive(ens(0.2, 0.4), np.zeros(2)), [0.7, 0.3])
    assert np.allclose(mean_predictive(ens(0.3, 0.3, 0.3), np.zeros(2)), [0.7, 0.3], rtol=0, atol=1e-15)
    ten = [0.2, 0.3, 0.4, 0.45, 0.5, 0.35, 0.4, 0.55, 0.5, 0.35]  # P(class 1), mean 0.4
    assert np.allclose(mean_predictive(ens(*ten), np.zeros(2)), [0.6, 0.4], atol=1e-12)


def test_member_probas_shape_and_dims():
    e = ens(0.1, 0.9)
    assert member_probas(e, np.zeros((3, 2))).shape == (2, 3, 2)
    with pytest.raises(ShapeError):
        mean_predictive(e, np.zeros(3))


# ensemble construction

def test_hidden_sizes_in_range_and_reproducible():
    c = EnsembleConfig(n_models=20, base_seed=11)
    sizes = [c.hidden_units(i) for i in range(20)]
    assert all(50 <= h <= 400 for h in sizes)
    assert sizes == [EnsembleConfig(n_models=20, base_seed=11).hidden_units(i) for i in range(20)]
    assert len(set(sizes)) > 5


def test_degenerate_width_range():
    c = EnsembleConfig(n_models=2, hidden_min=50, hidden_max=50)
    a, b = c.member_config(0), c.member_config(1)
    assert a.hidden_units == b.hidden_units == 50 and a.seed != b.seed


def test_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(n_models=1)
    with pytest.raises(ValueError):
        EnsembleConfig(hidden_min=10, hidden_max=5)


def test_build_ensemble_deterministic_and_parallel_independent():
    ds = synth_gaussian(10, 10, 2, 4.0, seed=3)
    c = EnsembleConfig(n_models=3, hidden_min=5, hidden_max=9, epochs=15, base_seed=4)
    q = np.random.default_rng(0).normal(size=(7, 2))
    a = member_probas(build_ensemble(ds, c), q)
    b = member_probas(build_ensemble(ds, c, jobs=2), q)
    assert np.array_equal(a, b)
    # member i depends only on (base_seed, i)
    bigger = EnsembleConfig(n_models=4, hidden_min=5, hidden_max=9, epochs=15, base_seed=4)
    assert np.array_equal(member_probas(build_ensemble(ds, bigger), q)[:3], a)


def test_build_ensemble_needs_both_classes():
    ds = synth_gaussian(3, 3, 2, 1.0, seed=0).subset([0, 1, 2])
    with pytest.raises(ValueError):
        build_ensemble(ds, EnsembleConfig(n_models=2))


# entropy fields

def test_unanimous_field_is_zero():
    f = entropy_field(ens(1.0, 1.0, 1.0), (0, 1, 0, 1), (6, 4))
    assert f.values.shape == (4, 6) and np.all(f.values < 1e-6)


def test_opposite_members_field_is_ln2():
    f = entropy_field(ens(0.0, 1.0), (-2, 2, -1, 1), (5, 5))
    assert np.all(np.abs(f.values - LN2) < 1e-6)


def test_field_peak_on_boundary():
    # members agree on a logistic boundary at x = 0; entropy peaks in the midline column
    e = ens(lambda x: 1 / (1 + np.exp(-4 * x[:, 0])), lambda x: 1 / (1 + np.exp(-6 * x[:, 0])))
    f = entropy_field(e, (-3, 3, -1, 1), (31, 5))
    xs, _ = f.cell_centers()
    peak_col = np.unravel_index(np.argmax(f.values), f.values.shape)[1]
    assert abs(xs[peak_col]) <= (6 / 31)


def test_field_requires_2d_and_sane_grid():
    with pytest.raises(ValueError):
        entropy_field(Ensemble([(5, Const(0.5, n_features=3))] * 2), (0, 1, 0, 1), (3, 3))
    with pytest.raises(ValueError):
        entropy_field(ens(0.5, 0.5), (1, 0, 0, 1), (3, 3))
    with pytest.raises(ValueError):
        entropy_field(ens(0.5, 0.5), (0, 1, 0, 1), (1, 3))


@given(st.lists(probs, min_size=2, max_size=5))
@settings(max_examples=50, deadline=None)
def test_field_bounded(p1s):
    f = entropy_field(ens(*p1s), (0, 1, 0, 1), (3, 2))
    assert np.all(f.values >= 0) and np.all(f.values <= LN2 + 1e-15)


def test_field_roundtrip(tmp_path):
    e = ens(lambda x: 1 / (1 + np.exp(-x[:, 0] * x[:, 1])), 0.3)
    f = entropy_field(e, (-1.5, 2.0, -3.0, 0.5), (7, 3))
    save_field(f, tmp_path / "f.csv")
    g = load_field(tmp_path / "f.csv")
    assert isinstance(g, EntropyField)
    assert g.bounds == f.bounds and g.resolution == f.resolution
    assert np.array_equal(g.values, f.values)
