import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tluq.data import LabeledDataset, ParseError, SplitSpec, load_feature_csv, save_feature_csv, split, synth_gaussian


def test_load_small_csv(tmp_path):
    (tmp_path / "f.csv").write_text("id,f0,f1,f2,label\na,1,2,3,0\nb,4.5,-1e-3,0,1\n")
    ds = load_feature_csv(tmp_path / "f.csv")
    assert ds.features.shape == (2, 3)
    assert ds.labels.tolist() == [0, 1] and ds.ids == ("a", "b")
    assert ds.features[1, 1] == -1e-3


@pytest.mark.parametrize("body,line", [
    ("id,f0,label\na,1,2\n", 2),
    ("id,f0,label\na,1,0\nb,x,1\n", 3),
    ("id,f0,label\na,1,0,9\n", 2),
    ("id,f0,label\na,nan,0\n", 2),
    ("id,g0,label\na,1,0\n", 1),
    ("", 1),
])
def test_parse_errors_carry_line(tmp_path, body, line):
    (tmp_path / "f.csv").write_text(body)
    with pytest.raises(ParseError) as err:
        load_feature_csv(tmp_path / "f.csv")
    assert err.value.line == line


def test_csv_roundtrip_exact(tmp_path):
    ds = synth_gaussian(6, 9, 5, 2.0, seed=3)
    save_feature_csv(ds, tmp_path / "r.csv")
    back = load_feature_csv(tmp_path / "r.csv")
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.labels, ds.labels) and back.ids == ds.ids


def test_dataset_validation():
    with pytest.raises(ValueError):
        LabeledDataset.from_arrays(np.ones((2, 2)), [0, 2])
    with pytest.raises(ValueError):
        LabeledDataset.from_arrays(np.ones((2, 2)), [0])
    with pytest.raises(ValueError):
        LabeledDataset.from_arrays(np.array([[np.inf, 0.0]]), [0])


def test_stratified_split_counts():
    ds = synth_gaussian(25, 75, 3, 1.0, seed=0)
    train, test = split(ds, SplitSpec(0.2, True, seed=11))
    assert test.counts() == (15, 5)
    assert train.counts() == (60, 20)


def test_split_deterministic():
    ds = synth_gaussian(25, 75, 3, 1.0, seed=0)
    a = split(ds, SplitSpec(seed=4))
    b = split(ds, SplitSpec(seed=4))
    assert a[1].ids == b[1].ids and a[0].ids == b[0].ids
    assert split(ds, SplitSpec(seed=5))[1].ids != a[1].ids


def test_split_degenerate_fraction():
    ds = synth_gaussian(5, 5, 2, 1.0, seed=0)
    with pytest.raises(ValueError):
        split(ds, SplitSpec(0.999, True, 0))
    with pytest.raises(ValueError):
        split(ds, SplitSpec(0.999, False, 0))


@given(st.integers(2, 40), st.integers(2, 40), st.floats(0.05, 0.6), st.booleans(),
       st.integers(0, 2**64 - 1))
@settings(max_examples=80, deadline=None)
def test_split_is_disjoint_cover(n_pos, n_neg, frac, stratified, seed):
    ds = synth_gaussian(n_pos, n_neg, 2, 1.0, seed=1)
    try:
        train, test = split(ds, SplitSpec(frac, stratified, seed))
    except ValueError:
        return  # a side would be empty
    assert set(train.ids) | set(test.ids) == set(ds.ids)
    assert not set(train.ids) & set(test.ids)
    if stratified:
        for cls, total in zip((0, 1), ds.counts()):
            expected = total * frac
            assert abs(test.counts()[cls] - expected) <= 1


def test_synth_layout_and_determinism():
    a = synth_gaussian(25, 75, 10, 3.0, seed=9)
    b = synth_gaussian(25, 75, 10, 3.0, seed=9)
    assert np.array_equal(a.features, b.features)
    assert a.labels[:25].tolist() == [1] * 25 and a.labels[25:].tolist() == [0] * 75
    assert a.ids[0] == "p0" and a.ids[25] == "n0"
    assert not np.array_equal(a.features, synth_gaussian(25, 75, 10, 3.0, seed=10).features)


def test_synth_class_balances():
    assert synth_gaussian(25, 75, 2, 1.0, seed=0).counts() == (75, 25)
    assert synth_gaussian(349, 397, 2, 1.0, seed=0).counts() == (397, 349)


def test_synth_separation_in_expectation():
    ds = synth_gaussian(4000, 4000, 4, 3.0, seed=2)
    mu1 = ds.features[ds.labels == 1].mean(axis=0)
    mu0 = ds.features[ds.labels == 0].mean(axis=0)
    assert abs(np.linalg.norm(mu1 - mu0) - 3.0) < 0.1
    assert np.allclose(mu1, 1.5 / 2.0, atol=0.05)


def test_synth_zero_separation_symmetric():
    ds = synth_gaussian(5000, 5000, 3, 0.0, seed=8)
    diff = ds.features[ds.labels == 1].mean(axis=0) - ds.features[ds.labels == 0].mean(axis=0)
    assert np.all(np.abs(diff) < 0.08)


def test_dataset_is_read_only():
    ds = synth_gaussian(2, 2, 2, 1.0, seed=0)
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0
