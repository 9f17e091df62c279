"""NumPy fallback for the sampling kernels.

Vectorizes over shots instead of looping per shot, but performs the exact
same splitmix64 draws and the exact same double-precision update sequence as
the compiled kernels, so the two backends agree bit for bit.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53
_ONE = np.uint64(1)


def backend_name() -> str:
    return "python"


def _uniforms(key: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized counter uniforms; indices is a uint64 array of draw indices."""
    z = np.uint64(key) + (indices + _ONE) * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _U53


def _shot_bases(m: int, shot0: int, stride: int, n_total: int) -> np.ndarray:
    shots = np.uint64(shot0) + np.arange(m, dtype=np.uint64) * np.uint64(stride)
    return shots * np.uint64(n_total)


def _advance(pi, h, gj, u):
    """One depth step of the sequential sign sampler, vectorized over shots."""
    if gj == 0.0:
        t = np.where(u < 0.5, 1.0, -1.0)
        return pi * t, h
    if np.any(h <= 0.0):
        raise ValueError("degenerate conditional: running weight <= 0")
    p = 0.5 * (1.0 + gj * pi / h)
    t = np.where(u < p, 1.0, -1.0)
    pi = pi * t
    return pi, h + gj * pi


def prefix_plus_count(g, m, key, shot0, stride, n_total) -> int:
    g = np.asarray(g, dtype=np.float64)
    base = _shot_bases(m, shot0, stride, n_total)
    pi = np.ones(m, dtype=np.float64)
    h = np.ones(m, dtype=np.float64)
    for j in range(len(g)):
        u = _uniforms(key, base + np.uint64(j))
        pi, h = _advance(pi, h, g[j], u)
    return int(np.sum(pi > 0.0))


def sample_bits(g, m, key, shot0, stride, n_total, out) -> None:
    g = np.asarray(g, dtype=np.float64)
    if len(g) != n_total or out.shape[0] < m or out.shape[1] != n_total:
        raise ValueError("output buffer shape mismatch")
    base = _shot_bases(m, shot0, stride, n_total)
    pi = np.ones(m, dtype=np.float64)
    h = np.ones(m, dtype=np.float64)
    prev = pi
    for j in range(n_total):
        u = _uniforms(key, base + np.uint64(j))
        pi, h = _advance(prev, h, g[j], u)
        out[:m, j] = (pi * prev < 0.0).astype(np.uint8)  # bit 1 where the sign flipped to -1
        prev = pi


def signature_counts(g, m, key, shot0, stride, n_total, out) -> None:
    g = np.asarray(g, dtype=np.float64)
    if len(g) != n_total or out.shape[0] != (1 << n_total):
        raise ValueError("output buffer shape mismatch")
    base = _shot_bases(m, shot0, stride, n_total)
    pi = np.ones(m, dtype=np.float64)
    h = np.ones(m, dtype=np.float64)
    sig = np.zeros(m, dtype=np.int64)
    for j in range(n_total):
        u = _uniforms(key, base + np.uint64(j))
        pi, h = _advance(pi, h, g[j], u)
        sig |= (pi < 0.0).astype(np.int64) << j
    np.add.at(out, sig, 1)
