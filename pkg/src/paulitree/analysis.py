"""Information-theoretic quantities behind the adaptive/non-adaptive gap.

The lower-bound argument for fixed designs runs through a handful of
closed-form objects: the binary divergence kl(alpha), Bernoulli KL, exact
one-shot and transcript KL between a hard pair of family members, the
rarely-sampled prefix cylinder that any allocation must leave behind, and
the headline budget formulas for both protocol classes.  Everything here is
deterministic and exact up to float arithmetic; Monte Carlo lives in the
harness.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .family import (
    Axis,
    BasisString,
    CoefficientProfile,
    FamilyInstance,
    enumerate_bases,
    outcome_distribution,
)

KL_ENUM_CAP = 16  # exact KL enumerates 2^n outcomes


@dataclass(frozen=True, eq=False)
class Allocation:
    """Probability allocation mu over the 3^n bases, lexicographic order."""

    n: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (3**self.n,):
            raise ValueError(f"need {3 ** self.n} weights for n={self.n}, got shape {w.shape}")
        if np.any(w < 0.0):
            raise ValueError("allocation weights must be nonnegative")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"allocation weights sum to {total}, not 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "Allocation":
        m = 3**n
        return cls(n, np.full(m, 1.0 / m))

    @classmethod
    def from_dict(cls, n: int, mapping: dict[BasisString, float]) -> "Allocation":
        w = np.zeros(3**n)
        for b, value in mapping.items():
            if len(b) != n:
                raise ValueError(f"basis {b} has length {len(b)}, expected {n}")
            w[b.index()] += value
        return cls(n, w)

    def weight(self, b: BasisString) -> float:
        return float(self.weights[b.index()])

    def cylinder_masses(self) -> np.ndarray:
        """Mass per length-(n-1) prefix cylinder (three bases each)."""
        return self.weights.reshape(3 ** (self.n - 1), 3).sum(axis=1)


@dataclass(frozen=True)
class HardPair:
    """Two family members sharing a prefix and differing in the last axis.

    The pair (prefix+X, prefix+Y) is the canonical two-point obstacle: its
    one-shot laws coincide on every basis outside the prefix cylinder and on
    the cylinder's third basis, so only two bases carry any signal.
    """

    profile: CoefficientProfile
    prefix: BasisString

    def __post_init__(self) -> None:
        if len(self.prefix) != self.profile.n - 1:
            raise ValueError(
                f"prefix length {len(self.prefix)} does not match n-1={self.profile.n - 1}"
            )

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def instance0(self) -> FamilyInstance:
        return FamilyInstance(self.profile, self.prefix.extended(Axis.X))

    @property
    def instance1(self) -> FamilyInstance:
        return FamilyInstance(self.profile, self.prefix.extended(Axis.Y))

    @property
    def basis0(self) -> BasisString:
        return self.prefix.extended(Axis.X)

    @property
    def basis1(self) -> BasisString:
        return self.prefix.extended(Axis.Y)

    def cylinder(self) -> tuple[BasisString, BasisString, BasisString]:
        return tuple(self.prefix.extended(a) for a in (Axis.X, Axis.Y, Axis.Z))

    def prefix_only(self) -> FamilyInstance:
        """The shared baseline state: full-depth coefficient removed."""
        return FamilyInstance(self.profile.without_alpha(), self.basis0)

    @property
    def delta(self) -> float:
        """Baseline floor 1 - sum|beta_k|; every baseline outcome probability
        is at least delta * 2^-n."""
        return 1.0 - self.profile.beta_abs_sum()

    @property
    def r_max(self) -> float:
        """Worst-case |signal ratio| |alpha|/delta over outcomes (see one_shot_kl)."""
        d = self.delta
        if d <= 0.0:
            return math.inf
        return abs(self.profile.alpha) / d


def kl_alpha(alpha: float) -> float:
    """Binary divergence kl(a) = (1+a)/2 log(1+a) + (1-a)/2 log(1-a).

    Symmetric, nonnegative, and ~ a^2/2 for small a.
    """
    if not abs(alpha) < 1.0:
        raise ValueError(f"kl_alpha needs |alpha| < 1, got {alpha}")
    if alpha == 0.0:
        return 0.0
    return 0.5 * (1.0 + alpha) * math.log1p(alpha) + 0.5 * (1.0 - alpha) * math.log1p(-alpha)


def _xlogx_ratio(p: float, q: float) -> float:
    # p * log(p/q) with 0 log 0 = 0; caller guarantees q > 0 when p > 0
    if p == 0.0:
        return 0.0
    return p * math.log(p / q)


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q), natural log."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0,1], got {p}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0,1], got {q}")
    if q in (0.0, 1.0):
        if p == q:
            return 0.0
        raise ValueError(f"infinite divergence: q={q} with p={p}")
    return _xlogx_ratio(p, q) + _xlogx_ratio(1.0 - p, 1.0 - q)


def one_shot_kl(
    instance0: FamilyInstance,
    instance1: FamilyInstance,
    b: BasisString,
    max_n: int = KL_ENUM_CAP,
) -> float:
    """Exact D_KL(p0 || p1) between the outcome laws of two family members
    measured in basis b, by enumeration over all 2^n outcomes.

    For a hard pair measured at b = basis0, writing q(o) for the shared
    baseline law (alpha removed) and r(o) = alpha*pi_n(o) / (2^n q(o)) for
    the signal ratio, the laws are p0 = q(1+r), p1 = q(1-r) up to which
    string matches; |r| <= |alpha|/delta, and the divergence is at most
    alpha^2/delta once |r| <= 1/2.

    Coinciding laws return exactly 0.0 (identical float arrays, not just a
    small difference).
    """
    if instance0.profile != instance1.profile:
        raise ValueError("one_shot_kl requires a shared coefficient profile")
    n = instance0.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the exact-KL enumeration cap {max_n}")
    p0 = outcome_distribution(instance0, b)
    p1 = outcome_distribution(instance1, b)
    if np.array_equal(p0, p1):
        return 0.0
    support = p0 > 0.0
    if np.any(p1[support] == 0.0):
        raise ValueError("support mismatch: p1 vanishes where p0 > 0")
    return float(np.sum(p0[support] * np.log(p0[support] / p1[support])))


def rare_cylinder(allocation: Allocation, max_n: int = KL_ENUM_CAP) -> tuple[BasisString, float]:
    """Least-sampled prefix cylinder of an allocation.

    Pigeonhole over the 3^(n-1) cylinders guarantees the minimizer has mass
    at most 3^-(n-1).  Ties resolve to the lexicographically smallest prefix.
    """
    n = allocation.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the enumeration cap {max_n}")
    masses = allocation.cylinder_masses()
    idx = int(np.argmin(masses))
    return BasisString.from_index(n - 1, idx), float(masses[idx])


class TranscriptKLBound(NamedTuple):
    exact: float
    paper_bound: float


def transcript_kl_bound(allocation: Allocation, shots: int, pair: HardPair) -> TranscriptKLBound:
    """Exact transcript KL for a non-adaptive design, with its analytic cap.

    For a fixed design drawing ``shots`` i.i.d. bases from ``allocation``,
    the chain rule gives exactly

        exact = shots * sum_b mu(b) * one_shot_kl(instance0, instance1, b),

    and since only the pair's own cylinder carries signal,

        paper_bound = shots * mu(cylinder) * alpha^2 / delta

    dominates it whenever the signal ratio stays small.  A warning is
    emitted when |alpha|/delta > 1/2, where the quadratic cap is no longer
    justified.
    """
    if shots < 0:
        raise ValueError("shot count must be nonnegative")
    n = pair.n
    if allocation.n != n:
        raise ValueError(f"allocation is over n={allocation.n}, pair has n={n}")
    delta = pair.delta
    if delta <= 0.0:
        raise ValueError("pair profile has no physicality margin (sum|beta| >= 1)")
    if pair.r_max > 0.5:
        warnings.warn(
            f"signal ratio |alpha|/delta = {pair.r_max:.4f} exceeds 1/2; "
            "the quadratic transcript bound is not guaranteed",
            RuntimeWarning,
            stacklevel=2,
        )
    inst0, inst1 = pair.instance0, pair.instance1
    per_shot = 0.0
    for b in enumerate_bases(n):
        mu = allocation.weight(b)
        if mu == 0.0:
            continue
        per_shot += mu * one_shot_kl(inst0, inst1, b)
    alpha = pair.profile.alpha
    cyl_mass = sum(allocation.weight(b) for b in pair.cylinder())
    return TranscriptKLBound(shots * per_shot, shots * cyl_mass * alpha * alpha / delta)


class BudgetFormulas(NamedTuple):
    adaptive_upper: float
    nonadaptive_lower_shape: float


def budget_formulas(profile: CoefficientProfile, eta: float) -> BudgetFormulas:
    """Headline budget formulas for both protocol classes.

    adaptive_upper: 24 ln(6n/eta) (sum_k beta_k^-2 + alpha^-2), the proven
    ceiling on the adaptive protocol's total shots at confidence eta.
    nonadaptive_lower_shape: 3^(n-1) ln(1/eta) / kl(alpha), the growth shape
    of the fixed-design lower bound with its universal constant omitted.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0,1), got {eta}")
    profile.require_nonzero()
    n = profile.n
    coeffs = profile.coefficients()
    inv_sq = float(np.sum(1.0 / coeffs**2))
    adaptive_upper = 24.0 * math.log(6.0 * n / eta) * inv_sq
    shape = 3.0 ** (n - 1) * math.log(1.0 / eta) / kl_alpha(profile.alpha)
    return BudgetFormulas(adaptive_upper, shape)


def empirical_transcript_llr(transcript, pair: HardPair) -> float:
    """Summed log p0/p1 of a recorded transcript for the pair's hypotheses.

    Averaged over transcripts drawn under instance0 with a fixed design,
    this converges to the exact transcript KL of that design.
    """
    from .protocols import _record_log_probs

    lp0 = _record_log_probs(transcript, pair.instance0)
    lp1 = _record_log_probs(transcript, pair.instance1)
    return float(np.sum(lp0 - lp1))
