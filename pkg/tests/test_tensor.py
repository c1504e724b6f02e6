import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tluq.tensor import ShapeError, conv2d, eigh, matmul, maxpool2d, relu

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def tensors(max_side=6):
    shape = st.tuples(st.integers(1, 2), st.integers(1, 3), st.integers(2, max_side), st.integers(2, max_side))
    return shape.flatmap(lambda s: arrays(np.float64, s, elements=finite))


# matmul

def test_matmul_identity_and_hand_value():
    a = np.arange(9.0).reshape(3, 3)
    assert np.array_equal(matmul(np.eye(3), a), a)
    assert matmul([[1, 2], [3, 4]], [[0], [1]]).tolist() == [[2.0], [4.0]]


def test_matmul_shape_error_names_shapes():
    with pytest.raises(ShapeError, match="2x3 by 2x2"):
        matmul(np.ones((2, 3)), np.ones((2, 2)))


def test_matmul_associative():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b, c = (rng.normal(size=(8, 8)) for _ in range(3))
        left, right = matmul(matmul(a, b), c), matmul(a, matmul(b, c))
        assert np.max(np.abs(left - right)) <= 1e-9 * np.max(np.abs(left))


# conv2d

def test_conv_identity_kernel():
    x = np.random.default_rng(1).normal(size=(2, 1, 5, 4))
    assert np.array_equal(conv2d(x, np.ones((1, 1, 1, 1)), np.zeros(1)), x)


def test_conv_hand_sum():
    assert conv2d(np.ones((1, 1, 3, 3)), np.ones((1, 1, 3, 3))).tolist() == [[[[9.0]]]]


def test_conv_same_padding_shape():
    out = conv2d(np.zeros((1, 3, 224, 224)), np.zeros((2, 3, 3, 3)), padding=1)
    assert out.shape == (1, 2, 224, 224)


def test_conv_is_cross_correlation():
    x = np.arange(9.0).reshape(1, 1, 3, 3)
    k = np.zeros((1, 1, 3, 3))
    k[0, 0, 0, 0] = 1.0  # picks the top-left pixel without flipping
    assert conv2d(x, k).item() == 0.0


def test_conv_stride_and_bias():
    x = np.arange(16.0).reshape(1, 1, 4, 4)
    out = conv2d(x, np.ones((1, 1, 2, 2)), np.array([-1.0]), stride=2)
    assert out[0, 0].tolist() == [[9.0, 17.0], [41.0, 49.0]]


def test_conv_kernel_too_large():
    with pytest.raises(ShapeError):
        conv2d(np.ones((1, 1, 2, 2)), np.ones((1, 1, 3, 3)))


def test_conv_channel_mismatch():
    with pytest.raises(ShapeError):
        conv2d(np.ones((1, 2, 4, 4)), np.ones((1, 3, 1, 1)))


@given(tensors())
@settings(max_examples=40, deadline=None)
def test_conv_unit_kernel_identity_property(x):
    c = x.shape[1]
    k = np.zeros((c, c, 1, 1))
    k[np.arange(c), np.arange(c)] = 1.0
    assert np.array_equal(conv2d(x, k, np.zeros(c)), x)


# maxpool2d / relu

def test_maxpool_examples():
    assert maxpool2d(np.array([[[[1.0, 2], [3, 4]]]])).tolist() == [[[[4.0]]]]
    ramp = np.arange(16.0).reshape(1, 1, 4, 4)
    assert maxpool2d(ramp)[0, 0].tolist() == [[5.0, 7.0], [13.0, 15.0]]
    assert np.all(maxpool2d(np.full((1, 2, 6, 6), 3.5)) == 3.5)


def test_maxpool_window_too_large():
    with pytest.raises(ShapeError):
        maxpool2d(np.ones((1, 1, 1, 3)), 2, 2)


@given(tensors())
@settings(max_examples=40, deadline=None)
def test_maxpool_bounds(x):
    out = maxpool2d(x, 2, 2)
    assert out.max() <= x.max()
    oh, ow = out.shape[2:]
    for i in range(oh):
        for j in range(ow):
            win = x[:, :, 2 * i:2 * i + 2, 2 * j:2 * j + 2]
            assert np.all(out[:, :, i, j] >= win.min(axis=(2, 3)))
            assert np.all(out[:, :, i, j] == win.max(axis=(2, 3)))


def test_relu_examples():
    assert relu(np.array([-1.0, 0.0, 2.0])).tolist() == [0.0, 0.0, 2.0]
    assert np.all(relu(-np.ones((1, 1, 2, 2))) == 0)
    pos = np.full((1, 1, 2, 2), 3.0)
    assert np.array_equal(relu(pos), pos)


@given(tensors())
@settings(max_examples=40, deadline=None)
def test_relu_idempotent(x):
    assert np.array_equal(relu(relu(x)), relu(x))


# eigh

def test_eigh_diagonal_and_identity():
    w, v = eigh(np.diag([1.0, 3.0]))
    assert w.tolist() == [3.0, 1.0]
    assert np.allclose(np.abs(v), [[0, 1], [1, 0]])
    w, _ = eigh(np.eye(4))
    assert np.allclose(w, 1.0)


def test_eigh_rejects_non_symmetric():
    with pytest.raises(ValueError):
        eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_eigh_reconstruction_5x5(method):
    a = np.random.default_rng(3).normal(size=(5, 5))
    a = a + a.T
    w, v = eigh(a, method=method)
    assert np.max(np.abs(v @ np.diag(w) @ v.T - a)) < 1e-8
    assert np.all(np.diff(w) <= 0)


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_eigh_jacobi_properties(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    a = a + a.T
    w, v = eigh(a, method="jacobi")
    norm = np.max(np.abs(a).sum(axis=1))
    assert np.max(np.abs(a @ v - v * w)) < 1e-8 * norm
    assert np.max(np.abs(v.T @ v - np.eye(n))) < 1e-8
    assert np.all(np.diff(w) <= 0)


def test_eigh_jacobi_agrees_with_lapack():
    a = np.random.default_rng(11).normal(size=(30, 30))
    a = a @ a.T
    assert np.allclose(eigh(a, method="jacobi")[0], eigh(a, method="lapack")[0], atol=1e-9)
