"""Reproducible O(n)-per-shot outcome sampling.

The closed-form outcome distribution factors into sequential per-qubit sign
draws: with matched coefficient g_j at depth j (beta_j on a matched prefix,
alpha at full depth, 0 otherwise) and running quantities pi_j (sign product)
and h_j = 1 + sum of matched c_k pi_k, the next sign is +1 with probability
0.5 * (1 + g_j * pi_{j-1} / h_{j-1}).  Marginalizing reproduces the closed
form exactly, so shots at any prefix depth can be drawn without touching the
unmeasured tail.

Randomness is counter-based (see ``_prng``): a stream derives a 64-bit key
from (seed, stream id), and shot s consumes draw indices s*n .. s*n + n - 1.
Batching therefore never changes the outcomes, and distinct trials can run
in parallel on decorrelated streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._prng import derive_key
from .family import BasisString, FamilyInstance, Outcome, check_physicality, longest_common_prefix


def bias_vector(instance: FamilyInstance, b: BasisString, depth: int) -> np.ndarray:
    """Per-depth signal coefficients seen when measuring basis b.

    Entry j-1 is the coefficient at depth j when b matches the hidden string
    to depth j, else 0.  Only the first ``depth`` entries are returned.
    """
    n = instance.n
    if len(b) != n:
        raise ValueError("basis length mismatch")
    if not 1 <= depth <= n:
        raise ValueError(f"depth {depth} out of range")
    matched = longest_common_prefix(b, instance.hidden)
    g = np.zeros(depth, dtype=np.float64)
    for j in range(1, min(matched, depth) + 1):
        g[j - 1] = instance.profile.coefficient(j)
    return g


@dataclass
class ShotStream:
    """Single-owner source of measurement shots for one family instance.

    The counter advances once per shot drawn; identical (instance, seed,
    stream) coordinates replay the identical shot sequence regardless of how
    calls are batched.
    """

    instance: FamilyInstance
    seed: int = 0
    stream: int = 0
    counter: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        report = check_physicality(self.instance.profile)
        if not report.physical:
            raise ValueError("cannot sample an unphysical instance")
        self._key = derive_key(self.seed, self.stream)

    @property
    def n(self) -> int:
        return self.instance.n

    def draw_outcome(self, b: BasisString) -> Outcome:
        bits = self.draw_outcomes(b, 1)
        return Outcome(tuple(int(x) for x in bits[0]))

    def draw_outcomes(self, b: BasisString, shots: int) -> np.ndarray:
        """Draw ``shots`` full outcomes; returns a (shots, n) uint8 bit array."""
        if shots < 0:
            raise ValueError("shot count must be nonnegative")
        n = self.n
        g = bias_vector(self.instance, b, n)
        out = np.empty((shots, n), dtype=np.uint8)
        _backend.sample_bits(g, shots, self._key, self.counter, 1, n, out)
        self.counter += shots
        return out

    def prefix_plus_count(self, b: BasisString, k: int, shots: int) -> int:
        """Number of shots (out of ``shots`` fresh ones) with S_k = +1.

        Only the first k signs of each shot are evaluated; the counter still
        advances one full shot per draw so recorded and unrecorded runs see
        the same stream positions.
        """
        if shots < 1:
            raise ValueError("shot count must be >= 1")
        g = bias_vector(self.instance, b, k)
        count = _backend.prefix_plus_count(g, shots, self._key, self.counter, 1, self.n)
        self.counter += shots
        return int(count)

    def prefix_statistic_mean(self, b: BasisString, k: int, shots: int) -> float:
        """Empirical mean of the depth-k prefix statistic over fresh shots."""
        plus = self.prefix_plus_count(b, k, shots)
        return (2.0 * plus - shots) / shots

    def signature_counts_strided(
        self, b: BasisString, shots: int, first_shot: int, stride: int
    ) -> np.ndarray:
        """Sign-signature histogram for shots at positions first_shot + t*stride.

        Low-level hook for round-robin designs; does not advance the counter
        (the caller accounts for the whole interleaved block via ``advance``).
        """
        n = self.n
        g = bias_vector(self.instance, b, n)
        out = np.zeros(1 << n, dtype=np.int64)
        _backend.signature_counts(g, shots, self._key, first_shot, stride, n, out)
        return out

    def draw_outcomes_strided(
        self, b: BasisString, shots: int, first_shot: int, stride: int
    ) -> np.ndarray:
        """Full outcome bits for shots at positions first_shot + t*stride.

        Like ``signature_counts_strided`` this does not advance the counter;
        the bits are identical to what contiguous draws at those positions
        would have produced.
        """
        n = self.n
        g = bias_vector(self.instance, b, n)
        out = np.empty((shots, n), dtype=np.uint8)
        _backend.sample_bits(g, shots, self._key, first_shot, stride, n, out)
        return out

    def advance(self, shots: int) -> None:
        """Account for ``shots`` stream positions consumed via the strided hooks."""
        if shots < 0:
            raise ValueError("shot count must be nonnegative")
        self.counter += shots
