"""Dense float64 arrays and the forward-pass primitives built on them.

Matrices are 2-D numpy arrays and image batches are 4-D ``(n, c, h, w)``
arrays. Every public function validates shapes, promotes to float64 and
returns a fresh array; nothing mutates its inputs.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    pass


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a finite 2-D float64 array with no empty axis."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_tensor4(a, name: str = "tensor") -> np.ndarray:
    t = np.asarray(a, dtype=np.float64)
    if t.ndim != 4:
        raise ShapeError(f"{name} must be 4-D (n, c, h, w), got shape {t.shape}")
    if min(t.shape) < 1:
        raise ShapeError(f"{name} has an empty dimension: {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} contains non-finite entries")
    return t


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def conv2d(x, kernels, bias=None, stride: int = 1, padding: int = 0) -> np.ndarray:
    """2-D cross-correlation of ``x (n, c, h, w)`` with ``kernels (o, c, kh, kw)``.

    Zero padding on all four sides; output spatial size is
    ``(h + 2*padding - kh) // stride + 1``. The sum runs kernel offset by
    kernel offset, so memory stays at one output-sized buffer.
    """
    x = as_tensor4(x, "input")
    k = as_tensor4(kernels, "kernels")
    n, c, h, w = x.shape
    o, kc, kh, kw = k.shape
    if kc != c:
        raise ShapeError(f"kernels expect {kc} input channels, input has {c}")
    if stride < 1 or padding < 0:
        raise ValueError(f"need stride >= 1 and padding >= 0, got stride={stride} padding={padding}")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp or kw > wp:
        raise ShapeError(f"kernel {kh}x{kw} larger than padded input {hp}x{wp}")
    if bias is None:
        bias = np.zeros(o)
    bias = np.asarray(bias, dtype=np.float64).reshape(-1)
    if bias.shape[0] != o:
        raise ShapeError(f"bias has {bias.shape[0]} entries for {o} output channels")

    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    oh = (hp - kh) // stride + 1
    ow = (wp - kw) // stride + 1
    out = np.zeros((n, o, oh, ow))
    for i in range(kh):
        for j in range(kw):
            patch = x[:, :, i:i + stride * (oh - 1) + 1:stride, j:j + stride * (ow - 1) + 1:stride]
            # (o, c) x (n, c, oh, ow) -> (n, o, oh, ow)
            out += np.einsum("oc,nchw->nohw", k[:, :, i, j], patch, optimize=True)
    out += bias[None, :, None, None]
    return out


def maxpool2d(x, size: int = 2, stride: int = 2) -> np.ndarray:
    x = as_tensor4(x, "input")
    n, c, h, w = x.shape
    if stride < 1 or size < 1:
        raise ValueError(f"need size >= 1 and stride >= 1, got size={size} stride={stride}")
    if size > min(h, w):
        raise ShapeError(f"pool window {size} exceeds input {h}x{w}")
    oh = (h - size) // stride + 1
    ow = (w - size) // stride + 1
    out = np.full((n, c, oh, ow), -np.inf)
    for i in range(size):
        for j in range(size):
            np.maximum(out, x[:, :, i:i + stride * (oh - 1) + 1:stride, j:j + stride * (ow - 1) + 1:stride], out=out)
    return out


def global_avgpool(x) -> np.ndarray:
    """Mean over the spatial axes, keeping a 1x1 map per channel."""
    x = as_tensor4(x, "input")
    return x.mean(axis=(2, 3), keepdims=True)


def relu(x) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def _round_robin(n: int) -> list[list[tuple[int, int]]]:
    # Circle-method tournament: n-1 rounds of n/2 disjoint index pairs (n even).
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        pairs = []
        for k in range(n // 2):
            p, q = players[k], players[n - 1 - k]
            pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


JACOBI_MAX_DIM = 256


def eigh(a, method: str = "auto", tol: float = 1e-14, max_sweeps: int = 100,
         symmetry_tol: float = 1e-9):
    """Eigen-decomposition of a real symmetric matrix.

    ``method="jacobi"`` runs cyclic Jacobi rotations, scheduled round-robin so
    each round applies n/2 disjoint plane rotations at once; sweeps continue
    until the off-diagonal Frobenius norm drops below ``tol * ||A||_F``.
    ``method="lapack"`` defers to ``numpy.linalg.eigh``. ``"auto"`` uses
    Jacobi up to ``JACOBI_MAX_DIM`` rows, where its O(n^3) Python-level
    sweeps are still cheap.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and the matching orthonormal eigenvectors as columns.
    """
    a = as_matrix(a, "eigh input")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"eigh needs a square matrix, got {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > symmetry_tol * scale:
        raise ValueError("eigh input is not symmetric")
    A = 0.5 * (a + a.T)
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_DIM else "lapack"
    if method == "lapack":
        w, V = np.linalg.eigh(A)
        return w[::-1].copy(), V[:, ::-1].copy()
    if method != "jacobi":
        raise ValueError(f"unknown eigh method {method!r}")
    Vt = np.eye(n)  # eigenvectors stored as rows while rotating
    if n > 1:
        m = n + (n % 2)
        rounds = []
        for pairs in _round_robin(m):
            keep = [(p, q) for p, q in pairs if q < n]
            rounds.append((np.array([p for p, _ in keep]), np.array([q for _, q in keep])))
        norm = np.linalg.norm(A)
        for _ in range(max_sweeps):
            if np.linalg.norm(A - np.diag(np.diag(A))) <= tol * norm:
                break
            for P, Q in rounds:
                apq = A[P, Q]
                active = np.abs(apq) > 1e-300
                if not active.any():
                    continue
                P, Q, apq = P[active], Q[active], apq[active]
                theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t[theta == 0] = 1.0
                c = (1.0 / np.sqrt(t * t + 1.0))[:, None]
                s = t[:, None] * c
                # A <- J^T A J as two row rotations around a transpose (A stays symmetric)
                for _half in range(2):
                    ap, aq = A[P], A[Q]
                    A[P] = c * ap - s * aq
                    A[Q] = s * ap + c * aq
                    A = np.ascontiguousarray(A.T)
                A[P, Q] = 0.0
                A[Q, P] = 0.0
                vp, vq = Vt[P], Vt[Q]
                Vt[P] = c * vp - s * vq
                Vt[Q] = s * vp + c * vq
        else:
            raise RuntimeError("Jacobi eigensolver did not converge")
    V = Vt.T
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]
