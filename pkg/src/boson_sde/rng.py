"""Counter-based pseudorandom numbers.

Every draw is a pure function of the tuple ``(seed, run, step, m)``: the tuple
is folded through a chain of SplitMix64 finalizers into one 64-bit word.  No
generator state exists, so trajectory ``run`` can be integrated on any worker,
in any order, and reproduce the same noise.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SECOND = np.uint64(0xD1B54A32D192ED03)
_S30, _S27, _S31, _S11 = (np.uint64(k) for k in (30, 27, 31, 11))
_MASK = (1 << 64) - 1


def mix64(x):
    """SplitMix64 finalizer (bijective avalanche mix on uint64)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = x + _GOLDEN
        x = (x ^ (x >> _S30)) * _M1
        x = (x ^ (x >> _S27)) * _M2
        return x ^ (x >> _S31)


def _u64(v):
    if isinstance(v, (int, np.integer)):
        return np.uint64(int(v) & _MASK)
    return np.asarray(v).astype(np.int64).astype(np.uint64) if np.asarray(v).dtype.kind == "i" else np.asarray(v, dtype=np.uint64)


def hash_index(seed, run, step, m):
    """64-bit word for the index tuple; arguments broadcast against each other."""
    h = mix64(_u64(seed))
    h = mix64(h ^ _u64(run))
    h = mix64(h ^ _u64(step))
    return mix64(h ^ _u64(m))


def _unit_interval(word):
    # 53 high bits -> (0, 1), never exactly 0
    return ((word >> _S11).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def normal_pairs(seed, run, step, m):
    """Box-Muller standard normal pair for each index; returns shape broadcast(...) + (2,)."""
    w1 = hash_index(seed, run, step, m)
    with np.errstate(over="ignore"):
        w2 = mix64(w1 ^ _SECOND)
    u1 = _unit_interval(w1)
    u2 = _unit_interval(w2)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


def signs(seed, run, step, m):
    """Unbiased +-1 from the parity of the index word."""
    w = hash_index(seed, run, step, m)
    return np.where((w & np.uint64(1)) == 1, 1.0, -1.0)


def indexed_prng(seed: int, run: int, step: int, m: int) -> tuple[np.ndarray, int]:
    """Standard normal pair and a +-1 sign for one index tuple."""
    pair = normal_pairs(seed, run, step, m)
    return pair, int(signs(seed, run, step, m))


def gaussian_block(seed: int, runs, step: int, dim: int) -> np.ndarray:
    """Standard normals of shape (len(runs), dim) for one time step.

    Pair ``m`` of a run supplies entries ``2m`` and ``2m + 1``.
    """
    runs = np.asarray(runs)
    npairs = (dim + 1) // 2
    pairs = normal_pairs(seed, runs[:, None], step, np.arange(npairs)[None, :])
    return pairs.reshape(len(runs), 2 * npairs)[:, :dim]


def sign_block(seed: int, runs, step: int, count: int) -> np.ndarray:
    """+-1 values of shape (len(runs), count) for one time step."""
    runs = np.asarray(runs)
    return signs(seed, runs[:, None], step, np.arange(count)[None, :])
