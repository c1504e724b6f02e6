import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tluq.classifiers import KINDS, ClassifierConfig, fit, load_model, minkowski_distance, rbf_kernel, save_model
from tluq.classifiers.gnb import VAR_FLOOR
from tluq.classifiers.mlp import init_params, loss, loss_and_grad
from tluq.classifiers.svm import smo
from tluq.data import LabeledDataset, synth_gaussian
from tluq.rng import Rng
from tluq.tensor import ShapeError

FAST = {"epochs": 60, "n_weak": 20}


def cfg(kind, **kw):
    return ClassifierConfig(kind, **kw)


@pytest.fixture(scope="module")
def blobs():
    return synth_gaussian(30, 30, 2, 6.0, seed=21)


# distances and kernels

def test_minkowski_examples():
    assert minkowski_distance([1.0, 2.0], [1.0, 2.0], 2) == 0.0
    assert minkowski_distance([0, 0], [3, 4], 2) == 5.0
    assert minkowski_distance([0, 0], [3, 4], 1) == 7.0
    with pytest.raises(ShapeError):
        minkowski_distance([0, 0], [1, 2, 3], 2)


def test_minkowski_p2_is_euclidean():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        d = rng.integers(1, 20)
        x, y = rng.normal(size=d), rng.normal(size=d)
        assert abs(minkowski_distance(x, y, 2) - np.linalg.norm(x - y)) < 1e-12


def test_rbf_examples():
    assert rbf_kernel([1.0, 2.0], [1.0, 2.0], 1.0) == 1.0
    assert abs(rbf_kernel([0.0, 0.0], [1.0, 1.0], 1.0) - math.exp(-1)) < 1e-15
    assert abs(rbf_kernel([0.0], [5.0], 1e6) - 1.0) < 1e-6
    with pytest.raises(ShapeError):
        rbf_kernel([0.0], [1.0, 2.0], 1.0)


def test_rbf_unsquared_toggle():
    # exp(-||d|| / 2 sigma^2) with ||d|| = sqrt(2)
    assert abs(rbf_kernel([0.0, 0.0], [1.0, 1.0], 1.0, unsquared_norm=True) - math.exp(-math.sqrt(2) / 2)) < 1e-15


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6), st.data(), st.floats(0.1, 10))
@settings(max_examples=80, deadline=None)
def test_rbf_range(x, data, sigma):
    y = data.draw(st.lists(st.floats(-5, 5), min_size=len(x), max_size=len(x)))
    k = rbf_kernel(x, y, sigma)
    assert 0.0 <= k <= 1.0
    if x == y:
        assert k == 1.0


# contract shared by all kinds

@pytest.mark.parametrize("kind", KINDS)
def test_memorization_floor(kind):
    ds = LabeledDataset.from_arrays([[0.0], [1.0]], [0, 1])
    # two rows give the MLP only one SGD step per epoch; 200 steps leave seed 0 at 0.4989
    model = fit(cfg(kind, epochs=1000), ds)
    p = model.predict_proba(ds.features)
    assert p[0, 0] >= 0.5 and p[1, 1] >= 0.5


@pytest.mark.parametrize("kind", KINDS)
def test_probabilities_valid_and_labels_consistent(kind, blobs):
    model = fit(cfg(kind, **FAST), blobs)
    q = np.random.default_rng(1).normal(scale=4, size=(50, 2))
    p = model.predict_proba(q)
    assert np.all((p >= 0) & (p <= 1))
    assert np.max(np.abs(p.sum(axis=1) - 1)) < 1e-9
    assert np.all(np.isfinite(model.decision_score(q)))
    single = model.predict_proba(q[0])
    assert single.shape == (2,) and np.allclose(single, p[0], rtol=0, atol=1e-12)
    if kind != "knn":  # knn labels follow the nearest neighbour on split votes
        assert np.array_equal(model.predict_label(q), (p[:, 1] > 0.5).astype(int))


@pytest.mark.parametrize("kind", [k for k in KINDS if k not in ("linear_svm", "rbf_svm")])
def test_score_is_positive_probability(kind, blobs):
    model = fit(cfg(kind, **FAST), blobs)
    q = np.random.default_rng(2).normal(scale=4, size=(30, 2))
    assert np.array_equal(model.decision_score(q), model.predict_proba(q)[:, 1])


@pytest.mark.parametrize("kind", ["linear_svm", "rbf_svm"])
def test_svm_score_is_margin(kind, blobs):
    model = fit(cfg(kind), blobs)
    q = np.random.default_rng(3).normal(scale=4, size=(30, 2))
    s = model.decision_score(q)
    assert np.array_equal(np.argsort(s, kind="stable"), np.argsort(model.predict_proba(q)[:, 1], kind="stable"))
    assert np.array_equal(model.predict_label(q), (s > 0).astype(int))


@pytest.mark.parametrize("kind", KINDS)
def test_dimension_mismatch(kind, blobs):
    model = fit(cfg(kind, **FAST), blobs)
    with pytest.raises(ShapeError):
        model.predict_proba(np.zeros(3))
    with pytest.raises(ValueError):
        model.predict_proba(np.array([np.nan, 0.0]))


@pytest.mark.parametrize("kind", ["linear_svm", "rbf_svm", "gp", "mlp", "random_forest", "adaboost"])
def test_single_class_rejected(kind):
    ds = LabeledDataset.from_arrays(np.arange(6.0).reshape(3, 2), [1, 1, 1])
    with pytest.raises(ValueError, match="both classes"):
        fit(cfg(kind), ds)


@pytest.mark.parametrize("kind", ["knn", "gnb"])
def test_single_class_tolerated(kind):
    ds = LabeledDataset.from_arrays(np.arange(6.0).reshape(3, 2), [1, 1, 1])
    model = fit(cfg(kind), ds)
    assert np.all(model.predict_label(np.random.default_rng(0).normal(size=(5, 2))) == 1)


def test_non_finite_training_rejected():
    from tluq.classifiers.base import check_training
    with pytest.raises(ValueError):
        check_training(np.array([[np.inf], [0.0]]), np.array([0, 1]), "gnb")


@pytest.mark.parametrize("kind", KINDS)
def test_model_container_roundtrip(kind, blobs, tmp_path):
    model = fit(cfg(kind, **FAST), blobs)
    save_model(model, tmp_path / "m.cmdl")
    back = load_model(tmp_path / "m.cmdl")
    q = np.random.default_rng(4).normal(scale=4, size=(20, 2))
    assert np.array_equal(back.predict_proba(q), model.predict_proba(q))
    assert np.array_equal(back.predict_label(q), model.predict_label(q))
    assert back.config == model.config


@pytest.mark.parametrize("kind", ["random_forest", "mlp", "adaboost"])
def test_seeded_kinds_deterministic(kind, blobs):
    q = np.random.default_rng(5).normal(scale=4, size=(20, 2))
    a = fit(cfg(kind, seed=3, **FAST), blobs).predict_proba(q)
    b = fit(cfg(kind, seed=3, **FAST), blobs).predict_proba(q)
    assert np.array_equal(a, b)


def test_predict_label_tie_goes_to_zero():
    # a 2-D GP far from its data predicts exactly (0.5, 0.5)
    ds = LabeledDataset.from_arrays([[0.0, 0.0], [1.0, 0.0]], [0, 1])
    model = fit(cfg("gp"), ds)
    far = np.array([100.0, 100.0])
    assert model.predict_proba(far).tolist() == [0.5, 0.5]
    assert model.predict_label(far) == 0


# symmetry under relabeling

@pytest.mark.parametrize("kind", ["knn", "gnb", "gp"])
def test_relabel_swaps_probabilities(kind):
    ds = synth_gaussian(12, 18, 3, 2.0, seed=6)
    q = np.random.default_rng(7).normal(size=(25, 3))
    p = fit(cfg(kind), ds).predict_proba(q)
    r = fit(cfg(kind), ds.relabeled()).predict_proba(q)
    assert np.max(np.abs(p - r[:, ::-1])) < 1e-6


@pytest.mark.parametrize("kind", ["linear_svm", "rbf_svm", "mlp", "random_forest", "adaboost"])
def test_relabel_swaps_labels(kind):
    ds = synth_gaussian(20, 20, 2, 8.0, seed=8)
    q = ds.features
    a = fit(cfg(kind, seed=1), ds).predict_label(q)
    b = fit(cfg(kind, seed=1), ds.relabeled()).predict_label(q)
    assert np.array_equal(a, 1 - b)


# knn

def test_knn_unanimous_vote():
    ds = LabeledDataset.from_arrays([[0.0], [0.1], [5.0], [5.1]], [0, 0, 1, 1])
    model = fit(cfg("knn"), ds)
    assert model.predict_proba([0.05]).tolist() == [1.0, 0.0]
    assert model.predict_proba([5.05]).tolist() == [0.0, 1.0]


def test_knn_split_vote_follows_nearest():
    ds = LabeledDataset.from_arrays([[0.0], [1.0]], [1, 0])
    model = fit(cfg("knn"), ds)
    assert model.predict_proba([0.2]).tolist() == [0.5, 0.5]
    assert model.predict_label([0.2]) == 1
    assert model.predict_label([0.8]) == 0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_knn_invariant_to_feature_permutation(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(15, 4)), rng.integers(0, 2, 15)
    q = rng.normal(size=(6, 4))
    perm = rng.permutation(4)
    a = fit(cfg("knn"), LabeledDataset.from_arrays(x, y))
    b = fit(cfg("knn"), LabeledDataset.from_arrays(x[:, perm], y))
    assert np.array_equal(a.predict_proba(q), b.predict_proba(q[:, perm]))


def test_knn_minkowski_p1():
    ds = LabeledDataset.from_arrays([[0.0, 3.0], [2.0, 2.0]], [0, 1])
    # from the origin: L1 distances 3 and 4, L-inf-ish L2 distances 3 and 2.83
    assert fit(cfg("knn", k=1, minkowski_p=1.0), ds).predict_label([0.0, 0.0]) == 0
    assert fit(cfg("knn", k=1, minkowski_p=2.0), ds).predict_label([0.0, 0.0]) == 1


# gnb

def test_gnb_boundary_midpoint():
    rng = Rng(12)
    x = np.concatenate([rng.normal(400), 10 + rng.normal(400)])[:, None]
    ds = LabeledDataset.from_arrays(x, [0] * 400 + [1] * 400)
    model = fit(cfg("gnb"), ds)
    grid = np.linspace(0, 10, 2001)[:, None]
    p1 = model.predict_proba(grid)[:, 1]
    boundary = grid[np.argmin(np.abs(p1 - 0.5)), 0]
    assert abs(boundary - 5.0) <= 0.5
    assert model.predict_proba([0.0])[0] >= 0.99


def test_gnb_variance_floor():
    ds = LabeledDataset.from_arrays([[1.0, 0.0], [1.0, 1.0], [2.0, 0.0], [2.0, 2.0]], [0, 0, 1, 1])
    model = fit(cfg("gnb"), ds)
    assert np.all(model.variances >= VAR_FLOOR)
    assert np.all(np.isfinite(model.predict_proba([[1.5, 0.5]])))


# svm

def test_linear_svm_separable_training_accuracy():
    ds = synth_gaussian(50, 50, 2, 8.0, seed=13)
    model = fit(cfg("linear_svm"), ds)
    assert np.mean(model.predict_label(ds.features) == ds.labels) >= 0.98


@pytest.mark.parametrize("seed", range(5))
def test_smo_kkt(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(40, 3))
    y = np.where(x[:, 0] + 0.5 * rng.normal(size=40) > 0, 1.0, -1.0)
    K = x @ x.T
    C = 1.0
    alpha, rho = smo(K, y, C)
    f = K @ (alpha * y) - rho
    yf = y * f
    tol = 1e-6
    assert abs(alpha @ y) < 1e-9
    assert np.all((alpha >= 0) & (alpha <= C))
    assert np.all(yf[alpha <= 1e-12] >= 1 - tol)
    free = (alpha > 1e-12) & (alpha < C - 1e-12)
    assert np.all(np.abs(yf[free] - 1) < tol)
    assert np.all(yf[alpha >= C - 1e-12] <= 1 + tol)


def test_rbf_svm_collapses_in_high_dimension():
    ds = synth_gaussian(10, 20, 2000, 3.0, seed=0)
    model = fit(cfg("rbf_svm"), ds)
    q = synth_gaussian(10, 10, 2000, 3.0, seed=1).features
    assert np.all(model.predict_label(q) == 0)


# mlp

@pytest.mark.parametrize("seed", range(5))
def test_mlp_gradient_matches_finite_differences(seed):
    rng = Rng(seed)
    params = init_params(4, 5, rng)
    x = rng.normal((7, 4))
    y = np.array([rng.integers(0, 2) for _ in range(7)])
    _, grads = loss_and_grad(params, x, y)
    h = 1e-5
    for name, p in params.items():
        num = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = loss(params, x, y)
            p[idx] = old - h
            down = loss(params, x, y)
            p[idx] = old
            num[idx] = (up - down) / (2 * h)
        # norm-wise per tensor: entrywise ratios on ~1e-6 entries measure roundoff, not the gradient
        rel = np.linalg.norm(num - grads[name]) / max(np.linalg.norm(num), np.linalg.norm(grads[name]))
        assert rel < 1e-5, name


def test_mlp_learns_separable_data(blobs):
    model = fit(cfg("mlp"), blobs)
    assert np.mean(model.predict_label(blobs.features) == blobs.labels) >= 0.95


# adaboost / forest

@pytest.mark.parametrize("seed", range(4))
def test_adaboost_exponential_loss_non_increasing(seed):
    ds = synth_gaussian(30, 40, 3, 2.5, seed=seed)
    model = fit(cfg("adaboost"), ds)
    ys = np.where(ds.labels == 1, 1.0, -1.0)
    staged = model.staged_scores(ds.features)
    exp_loss = [np.mean(np.exp(-ys * F)) for F in staged]
    errors = [np.mean((F > 0).astype(int) != ds.labels) for F in staged]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(exp_loss, exp_loss[1:])), exp_loss
    assert all(e <= b + 1e-12 for e, b in zip(errors, exp_loss))  # 0/1 error sits under the bound


def test_adaboost_training_error_can_rise():
    # the 0/1 training error of discrete boosting is not monotone; pinned so a change is noticed
    ds = synth_gaussian(30, 40, 3, 2.5, seed=2)
    staged = fit(cfg("adaboost"), ds).staged_scores(ds.features)
    errors = [np.mean((F > 0).astype(int) != ds.labels) for F in staged]
    assert errors[1] > errors[0]


def test_adaboost_stops_on_perfect_stump():
    ds = LabeledDataset.from_arrays([[0.0], [1.0], [2.0], [3.0]], [0, 0, 1, 1])
    model = fit(cfg("adaboost"), ds)
    assert model.n_rounds == 1
    assert model.predict_label(ds.features).tolist() == [0, 0, 1, 1]


def test_forest_vote_fraction():
    ds = synth_gaussian(20, 20, 4, 4.0, seed=3)
    model = fit(cfg("random_forest", n_trees=7), ds)
    p1 = model.predict_proba(np.random.default_rng(0).normal(size=(30, 4)))[:, 1]
    assert np.allclose(p1 * 7, np.round(p1 * 7))
