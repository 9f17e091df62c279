"""Prefix-structured Pauli state family and its closed-form observables.

A family member on n qubits is

    rho = 2^-n * (I + sum_{k<n} beta_k P^(k) + alpha P^(n)),

where P^(k) acts as the hidden string's first k Paulis on qubits 1..k and as
identity elsewhere.  Everything in this module (outcome distributions, prefix
expectations, spectra, trace-distance bounds) is evaluated from these
coefficients directly, in O(n) or O(2^n * n) time, without ever materializing
a density matrix.  The dense-matrix counterpart lives in ``oracle`` and is
used only to cross-validate this module.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

EIGEN_CAP = 20  # default cap for 2^n enumerations


class Axis(enum.IntEnum):
    """Single-qubit measurement axis, totally ordered X < Y < Z."""

    X = 0
    Y = 1
    Z = 2

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class BasisString:
    """An immutable string of measurement axes, one per qubit.

    Ordering and enumeration are lexicographic with X < Y < Z, so tuple
    comparison on ``axes`` gives exactly the canonical order.
    """

    axes: tuple[Axis, ...]

    def __post_init__(self) -> None:
        # empty strings are allowed: they appear as prefixes (n=1 cylinders)
        object.__setattr__(self, "axes", tuple(Axis(a) for a in self.axes))

    @classmethod
    def from_str(cls, text: str) -> "BasisString":
        try:
            return cls(tuple(Axis[c] for c in text.upper()))
        except KeyError as exc:
            raise ValueError(f"invalid axis symbol in {text!r}") from exc

    @classmethod
    def from_codes(cls, codes: Iterable[int]) -> "BasisString":
        return cls(tuple(Axis(int(c)) for c in codes))

    @classmethod
    def from_index(cls, n: int, index: int) -> "BasisString":
        """Inverse of :meth:`index`: base-3 digits, first qubit most significant."""
        if not 0 <= index < 3**n:
            raise ValueError(f"index {index} out of range for n={n}")
        digits = []
        for _ in range(n):
            index, d = divmod(index, 3)
            digits.append(d)
        return cls(tuple(Axis(d) for d in reversed(digits)))

    def __len__(self) -> int:
        return len(self.axes)

    def __iter__(self) -> Iterator[Axis]:
        return iter(self.axes)

    def __getitem__(self, i: int) -> Axis:
        return self.axes[i]

    def __str__(self) -> str:
        return "".join(a.name for a in self.axes)

    def codes(self) -> np.ndarray:
        return np.array([int(a) for a in self.axes], dtype=np.uint8)

    def index(self) -> int:
        v = 0
        for a in self.axes:
            v = 3 * v + int(a)
        return v

    def prefix(self, k: int) -> "BasisString":
        if not 0 <= k <= len(self):
            raise ValueError(f"prefix length {k} out of range")
        return BasisString(self.axes[:k])

    def extended(self, *extra: Axis) -> "BasisString":
        return BasisString(self.axes + tuple(Axis(a) for a in extra))


def enumerate_bases(n: int) -> Iterator[BasisString]:
    """All 3^n basis strings in lexicographic order."""
    for axes in itertools.product((Axis.X, Axis.Y, Axis.Z), repeat=n):
        yield BasisString(axes)


@dataclass(frozen=True)
class Outcome:
    """Measurement record of one shot: one bit per qubit.

    The sign convention is lambda_i = (-1)^bit, i.e. +1 for bit 0.
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) < 1:
            raise ValueError("outcome needs at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("outcome bits must be 0 or 1")

    @classmethod
    def from_index(cls, n: int, index: int) -> "Outcome":
        if not 0 <= index < 2**n:
            raise ValueError(f"index {index} out of range for n={n}")
        return cls(tuple((index >> (n - 1 - i)) & 1 for i in range(n)))

    def __len__(self) -> int:
        return len(self.bits)

    def index(self) -> int:
        v = 0
        for b in self.bits:
            v = 2 * v + b
        return v

    def signs(self) -> tuple[int, ...]:
        return tuple(1 - 2 * b for b in self.bits)

    def sign_product(self, k: int) -> int:
        """Product of the first k signs, the depth-k prefix statistic."""
        if not 1 <= k <= len(self.bits):
            raise ValueError(f"depth {k} out of range")
        return 1 - 2 * (sum(self.bits[:k]) & 1)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def enumerate_outcomes(n: int) -> Iterator[Outcome]:
    for bits in itertools.product((0, 1), repeat=n):
        yield Outcome(bits)


@dataclass(frozen=True)
class CoefficientProfile:
    """Tilt coefficients (beta_1..beta_{n-1}, alpha) of a family member.

    ``betas`` is empty for n = 1; all prefix machinery then degenerates to
    the single full-depth term.
    """

    alpha: float
    betas: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "alpha", float(self.alpha))
        if not all(math.isfinite(b) for b in self.betas) or not math.isfinite(self.alpha):
            raise ValueError("coefficients must be finite")

    @property
    def n(self) -> int:
        return len(self.betas) + 1

    def coefficient(self, k: int) -> float:
        """c_k: beta_k for depth k < n, alpha at full depth k = n."""
        if not 1 <= k <= self.n:
            raise ValueError(f"depth {k} out of range for n={self.n}")
        return self.alpha if k == self.n else self.betas[k - 1]

    def coefficients(self) -> np.ndarray:
        return np.array(list(self.betas) + [self.alpha], dtype=np.float64)

    def abs_sum(self) -> float:
        return abs(self.alpha) + sum(abs(b) for b in self.betas)

    def beta_abs_sum(self) -> float:
        return sum(abs(b) for b in self.betas)

    def without_alpha(self) -> "CoefficientProfile":
        """Prefix-only profile: the same betas with the full-depth term removed."""
        return CoefficientProfile(0.0, self.betas)

    def require_nonzero(self) -> None:
        if self.alpha == 0.0 or any(b == 0.0 for b in self.betas):
            raise ValueError("profile has a zero coefficient; every depth must carry signal")


class PhysicalityReport(NamedTuple):
    physical: bool
    margin: float


def check_physicality(profile: CoefficientProfile) -> PhysicalityReport:
    """Sufficient positivity condition: |alpha| + sum|beta_k| <= 1.

    The margin is 1 minus that sum (negative when violated).
    """
    margin = 1.0 - profile.abs_sum()
    return PhysicalityReport(margin >= 0.0, margin)


def corollary_profile(n: int, epsilon: float) -> CoefficientProfile:
    """Scaling-experiment coefficients: alpha = eps/4, beta_k = eps/(4(n-1))."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    alpha = epsilon / 4.0
    betas = () if n == 1 else (epsilon / (4.0 * (n - 1)),) * (n - 1)
    return CoefficientProfile(alpha, betas)


@dataclass(frozen=True)
class FamilyInstance:
    """A family member: coefficient profile plus the hidden basis string."""

    profile: CoefficientProfile
    hidden: BasisString

    def __post_init__(self) -> None:
        if len(self.hidden) != self.profile.n:
            raise ValueError(
                f"hidden string length {len(self.hidden)} != profile n {self.profile.n}"
            )

    @property
    def n(self) -> int:
        return self.profile.n


def longest_common_prefix(b: BasisString, b2: BasisString) -> int:
    if len(b) != len(b2):
        raise ValueError("basis strings must have equal length")
    for i, (a, c) in enumerate(zip(b.axes, b2.axes)):
        if a != c:
            return i
    return len(b)


def _require_physical(profile: CoefficientProfile) -> None:
    report = check_physicality(profile)
    if not report.physical:
        raise ValueError(
            f"profile is not physical: |alpha|+sum|beta| exceeds 1 by {-report.margin:.3g}"
        )


_SPECTRUM_TOL = 1e-12


def state_eigenvalues(instance: FamilyInstance, max_n: int = EIGEN_CAP) -> np.ndarray:
    """Spectrum of the family state, one eigenvalue per sign pattern t in {±1}^n.

    With s_k = prod_{i<=k} t_i the eigenvalue is
    (1 + sum_{k<n} beta_k s_k + alpha s_n) / 2^n.  Returned in enumeration
    order of t (not sorted); compare as a multiset.
    """
    n = instance.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds enumeration cap {max_n}")
    _require_physical(instance.profile)
    coeffs = instance.profile.coefficients()
    v = np.arange(1 << n, dtype=np.int64)
    acc = np.ones(1 << n, dtype=np.float64)
    s = np.ones(1 << n, dtype=np.float64)
    for k in range(1, n + 1):
        t_k = 1.0 - 2.0 * ((v >> (n - k)) & 1)
        s = s * t_k
        acc = acc + coeffs[k - 1] * s
    # physical profiles have an exactly nonnegative spectrum; summation
    # round-off at the boundary |alpha|+sum|beta| = 1 may leave a -1e-17
    low = float(acc.min())
    if low < -_SPECTRUM_TOL * (1 << n):
        raise AssertionError(f"negative eigenvalue {low / (1 << n)} for a physical profile")
    return np.maximum(acc, 0.0) / float(1 << n)


def prefix_expectation(instance: FamilyInstance, b: BasisString, k: int) -> float:
    """Expected depth-k prefix statistic under basis b.

    beta_k on a matched k-prefix (k < n), alpha when b equals the hidden
    string at full depth, 0 otherwise.
    """
    n = instance.n
    if not 1 <= k <= n:
        raise ValueError(f"depth {k} out of range 1..{n}")
    if len(b) != n:
        raise ValueError("basis length mismatch")
    if longest_common_prefix(b, instance.hidden) >= k:
        return instance.profile.coefficient(k)
    return 0.0


_CLAMP_TOL = 1e-12


def outcome_probability(instance: FamilyInstance, b: BasisString, o: Outcome) -> float:
    """Closed-form Born probability of outcome o when measuring basis b.

    p(o) = 2^-n * (1 + sum over matched depths k of c_k * prod_{i<=k} lambda_i)
    with lambda_i = (-1)^{o_i}.  Clamped to [0, 1]; a violation beyond 1e-12
    would indicate a bug and raises instead.
    """
    n = instance.n
    if len(b) != n or len(o) != n:
        raise ValueError("basis/outcome length mismatch")
    _require_physical(instance.profile)
    matched = longest_common_prefix(b, instance.hidden)
    acc = 1.0
    pi = 1.0
    for k in range(1, matched + 1):
        pi *= 1.0 - 2.0 * o.bits[k - 1]
        acc += instance.profile.coefficient(k) * pi
    p = acc / float(1 << n)
    if p < -_CLAMP_TOL or p > 1.0 + _CLAMP_TOL:
        raise AssertionError(f"closed-form probability {p} outside [0,1] beyond tolerance")
    return min(max(p, 0.0), 1.0)


def outcome_distribution(instance: FamilyInstance, b: BasisString, max_n: int = EIGEN_CAP) -> np.ndarray:
    """All 2^n outcome probabilities for basis b, indexed by Outcome.index()."""
    n = instance.n
    if len(b) != n:
        raise ValueError("basis length mismatch")
    if n > max_n:
        raise ValueError(f"n={n} exceeds enumeration cap {max_n}")
    _require_physical(instance.profile)
    matched = longest_common_prefix(b, instance.hidden)
    v = np.arange(1 << n, dtype=np.int64)
    acc = np.ones(1 << n, dtype=np.float64)
    pi = np.ones(1 << n, dtype=np.float64)
    for k in range(1, matched + 1):
        sign_k = 1.0 - 2.0 * ((v >> (n - k)) & 1)
        pi = pi * sign_k
        acc = acc + instance.profile.coefficient(k) * pi
    p = acc / float(1 << n)
    bad = float(np.max(np.maximum(-p, p - 1.0), initial=0.0))
    if bad > _CLAMP_TOL:
        raise AssertionError(f"distribution leaves [0,1] by {bad}")
    return np.clip(p, 0.0, 1.0)


def trace_distance_bounds(
    profile: CoefficientProfile, b: BasisString, b2: BasisString
) -> tuple[float, float]:
    """Two-sided bounds on the trace distance between family members b, b2.

    With r the first mismatch depth: lower = |c_r|/2 and
    upper = sum_{k>=r, k<n} |beta_k| + |alpha|.
    """
    n = profile.n
    if len(b) != n or len(b2) != n:
        raise ValueError("basis length mismatch")
    if b == b2:
        raise ValueError("strings are identical; bounds require a mismatch")
    r = longest_common_prefix(b, b2) + 1
    lower = abs(profile.coefficient(r)) / 2.0
    upper = sum(abs(profile.betas[k - 1]) for k in range(r, n)) + abs(profile.alpha)
    return lower, upper


def hard_pair_trace_distance(alpha: float) -> float:
    """Exact trace distance |alpha|/sqrt(2) of a last-symbol X/Y pair."""
    return abs(alpha) / math.sqrt(2.0)
