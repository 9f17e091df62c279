"""Counter-based pseudo-random number scheme shared by all sampling backends.

Every random decision in the package is a pure function of a 64-bit stream
key and a 64-bit draw index:

    u64(key, i)     = mix64((key + (i + 1) * GOLDEN) mod 2^64)
    uniform(key, i) = (u64(key, i) >> 11) * 2^-53        in [0, 1)

where ``mix64`` is the splitmix64 output permutation (Weyl increment plus
Stafford's mix13 finalizer).  Stream keys are derived by chain-hashing a user
seed with integer coordinates such as (protocol, n, budget, trial), so
parallel trials get decorrelated streams without any shared state, and a
given (seed, coordinates, shot index, qubit index) always maps to the same
uniform regardless of batching or evaluation order.

The compiled kernels and the NumPy fallback implement exactly this mapping
and are tested for bit-identical agreement.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB
_SALT = 0x6A09E667F3BCC909

U53_SCALE = 2.0**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer: bijective 64-bit mixing permutation."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_2) & MASK64
    return z ^ (z >> 31)


def draw_u64(key: int, index: int) -> int:
    return mix64((key + ((index + 1) * GOLDEN)) & MASK64)


def uniform(key: int, index: int) -> float:
    """Deterministic uniform in [0, 1) for the given stream key and index."""
    return (draw_u64(key, index) >> 11) * U53_SCALE


def derive_key(seed: int, *coords: int) -> int:
    """Hash a seed and integer coordinates into a 64-bit stream key."""
    key = mix64(seed & MASK64)
    for c in coords:
        key = mix64(key ^ mix64((c ^ _SALT) & MASK64))
    return key
