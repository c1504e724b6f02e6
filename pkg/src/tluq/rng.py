"""Portable seeded random numbers.

Every "deterministic given seed" contract in the package runs through
:class:`Rng`, a xoshiro256** generator whose 256-bit state is filled from a
64-bit seed by four successive splitmix64 outputs (the reference seeding
procedure recommended by the xoshiro authors). Nothing here touches numpy's
global or default generators, so a seed replays bit-for-bit on any platform.

Derived draws:

* ``uniform``: ``(u64 >> 11) * 2**-53``, a double in [0, 1).
* ``normal``: Box-Muller on consecutive uniform pairs ``(u1, u2)``:
  ``r = sqrt(-2 ln(1 - u1))``, emitting ``r cos(2 pi u2)`` then
  ``r sin(2 pi u2)``. An odd request discards the final sine.
* ``integers``: unbiased bounded draw by rejection on the smallest
  covering bit mask.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x`` (state advanced by the golden gamma first)."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Child seed ``base_seed XOR splitmix64(index)``, used for per-run/per-member streams."""
    return (int(base_seed) ^ splitmix64(int(index))) & MASK64


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def xoshiro_next(state: list[int]) -> int:
    """Pure-Python reference step; mutates ``state`` in place."""
    s0, s1, s2, s3 = state
    result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[:] = [s0, s1, s2, s3]
    return result


@njit(cache=True)
def _fill_u64(state, out):
    # state: uint64[4], advanced in place
    s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
    for i in range(out.shape[0]):
        x = s1 * np.uint64(5)
        x = (x << np.uint64(7)) | (x >> np.uint64(57))
        out[i] = x * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3


class Rng:
    """xoshiro256** stream seeded from a single unsigned 64-bit integer."""

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0 or seed > MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        words = []
        x = seed
        for _ in range(4):
            words.append(splitmix64(x))
            x = (x + _GOLDEN) & MASK64
        self._state = np.array(words, dtype=np.uint64)

    @property
    def state(self) -> tuple[int, int, int, int]:
        return tuple(int(w) for w in self._state)

    def next_u64(self) -> int:
        out = np.empty(1, dtype=np.uint64)
        _fill_u64(self._state, out)
        return int(out[0])

    def u64(self, n: int) -> np.ndarray:
        out = np.empty(int(n), dtype=np.uint64)
        if n:
            _fill_u64(self._state, out)
        return out

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        n = 1 if size is None else int(np.prod(size))
        u = (self.u64(n) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
        u = low + (high - low) * u
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, size=None, loc: float = 0.0, scale: float = 1.0):
        n = 1 if size is None else int(np.prod(size))
        pairs = (n + 1) // 2
        u = (self.u64(2 * pairs) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        z = loc + scale * z[:n]
        return float(z[0]) if size is None else z.reshape(size)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        span = int(high) - int(low)
        if span <= 0:
            raise ValueError(f"empty range [{low}, {high})")
        if span == 1:
            return int(low)
        mask = (1 << (span - 1).bit_length()) - 1
        while True:
            v = self.next_u64() & mask
            if v < span:
                return int(low) + v

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)``, swapping from the top down."""
        idx = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.integers(0, i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx

    def partial_permutation(self, n: int, k: int) -> np.ndarray:
        """All of ``range(n)`` with a uniform random k-subset, in random order, in front.

        Forward Fisher-Yates stopped after ``k`` swaps; costs ``k`` draws.
        """
        idx = np.arange(n)
        for i in range(min(k, n - 1)):
            j = self.integers(i, n)
            idx[i], idx[j] = idx[j], idx[i]
        return idx

    def choice(self, n: int, size: int, replace: bool = True) -> np.ndarray:
        if replace:
            return np.array([self.integers(0, n) for _ in range(size)], dtype=np.int64)
        if size > n:
            raise ValueError("cannot draw more items than the population without replacement")
        return self.permutation(n)[:size]
