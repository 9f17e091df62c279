"""Measurement strategies over shot streams.

Two competing policies:

* ``run_adaptive``: stagewise prefix recovery.  At stage k the protocol
  tests the three candidate bases (recovered prefix, candidate axis,
  X padding), draws m_k fresh shots per candidate, and keeps the axis whose
  depth-k sign statistic wins under the chosen stage rule.
* ``run_nonadaptive_uniform``: the fixed uniform design.  Shots are spread
  round-robin over all 3^n bases in lexicographic order and the hidden
  string is estimated by full-family maximum likelihood.

Both record transcripts (optionally, for memory-heavy sweeps) and know
nothing about the hidden string except through sampled outcomes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .family import (
    Axis,
    BasisString,
    CoefficientProfile,
    FamilyInstance,
    Outcome,
)
from .sampling import ShotStream

NONADAPTIVE_CAP_N = 9

_AXES = (Axis.X, Axis.Y, Axis.Z)


class StageRule(enum.Enum):
    """Per-stage decision rule for the adaptive protocol."""

    ARGMAX_ABS = "argmax-abs"
    LLR = "llr"


@dataclass
class Transcript:
    """Ordered record of (basis, outcome) shots.

    Arrays are None when a run was executed without recording; the shot
    count is always tracked.  Recording is append-only during a run.
    """

    n: int
    total_shots: int
    basis_codes: np.ndarray | None = None  # (total_shots, n) uint8
    outcome_bits: np.ndarray | None = None

    def __post_init__(self) -> None:
        if (self.basis_codes is None) != (self.outcome_bits is None):
            raise ValueError("basis and outcome arrays must be recorded together")
        if self.basis_codes is not None:
            expect = (self.total_shots, self.n)
            if self.basis_codes.shape != expect or self.outcome_bits.shape != expect:
                raise ValueError("recorded arrays do not match total_shots")

    @property
    def recorded(self) -> bool:
        return self.basis_codes is not None

    def records(self):
        """Iterate (BasisString, Outcome) pairs; requires a recorded run."""
        if not self.recorded:
            raise ValueError("transcript was not recorded")
        for row_b, row_o in zip(self.basis_codes, self.outcome_bits):
            yield BasisString.from_codes(row_b), Outcome(tuple(int(x) for x in row_o))


@dataclass
class ProtocolResult:
    estimate: BasisString
    transcript: Transcript
    per_stage_shots: tuple[int, ...] | None = None
    correct: bool | None = None  # filled by the harness against ground truth


def theorem1_stage_budget(profile: CoefficientProfile, k: int, eta: float) -> int:
    """Stage shot budget ceil((8/mu_k^2) ln(6n/eta)), mu_k = beta_k or alpha."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0,1), got {eta}")
    mu = profile.coefficient(k)
    if mu == 0.0:
        raise ValueError(f"zero coefficient at depth {k}: stage budget undefined")
    return math.ceil(8.0 / (mu * mu) * math.log(6.0 * profile.n / eta))


def theorem1_budgets(profile: CoefficientProfile, eta: float) -> tuple[int, ...]:
    return tuple(theorem1_stage_budget(profile, k, eta) for k in range(1, profile.n + 1))


def _xlog(count: int, x: float) -> float:
    # count * log(x) with the 0 * log(0) = 0 convention
    if count == 0:
        return 0.0
    if x <= 0.0:
        return -math.inf
    return count * math.log(x)


def _binomial_llr(plus_count: int, shots: int, mu: float) -> float:
    """Two-sided binomial log-likelihood ratio of the +1 count against a fair null.

    Signal hypothesis: P(+1) = (1 + |mu|)/2 with either sign of the bias;
    the larger of the two one-sided values is returned.
    """
    a = abs(mu)
    up = _xlog(plus_count, 1.0 + a) + _xlog(shots - plus_count, 1.0 - a)
    down = _xlog(plus_count, 1.0 - a) + _xlog(shots - plus_count, 1.0 + a)
    return max(up, down)


def _stage_decision(rule: StageRule, plus_counts: list[int], shots: int, mu: float) -> int:
    if rule is StageRule.ARGMAX_ABS:
        scores = [abs(2.0 * c - shots) / shots for c in plus_counts]
    elif rule is StageRule.LLR:
        scores = [_binomial_llr(c, shots, mu) for c in plus_counts]
    else:
        raise ValueError(f"unknown stage rule {rule!r}")
    best = 0
    for i in (1, 2):
        if scores[i] > scores[best]:
            best = i
    return best


def _resolve_stage_budgets(
    profile: CoefficientProfile, eta: float | None, shots_per_stage
) -> tuple[int, ...]:
    n = profile.n
    if shots_per_stage is None:
        if eta is None:
            raise ValueError("either eta (theorem budgets) or shots_per_stage is required")
        return theorem1_budgets(profile, eta)
    if isinstance(shots_per_stage, int):
        budgets = (shots_per_stage,) * n
    else:
        budgets = tuple(int(m) for m in shots_per_stage)
        if len(budgets) != n:
            raise ValueError(f"need {n} stage budgets, got {len(budgets)}")
    if any(m < 1 for m in budgets):
        raise ValueError("stage budgets must be >= 1")
    return budgets


def run_adaptive(
    instance: FamilyInstance,
    eta: float | None = None,
    rule: StageRule = StageRule.LLR,
    shots_per_stage=None,
    stream: ShotStream | None = None,
    record: bool = True,
) -> ProtocolResult:
    """Stagewise adaptive recovery of the hidden basis string.

    Stage k tests candidates (recovered prefix, a, X...X) for a in X,Y,Z in
    axis order, drawing m_k fresh shots per candidate (every shot advances
    the stream), and keeps the winner under ``rule``.  Ties break toward the
    earlier axis.
    """
    if stream is None:
        stream = ShotStream(instance)
    n = instance.n
    budgets = _resolve_stage_budgets(instance.profile, eta, shots_per_stage)
    prefix: list[Axis] = []
    chunks: list[tuple[np.ndarray, np.ndarray]] = []
    for k in range(1, n + 1):
        m_k = budgets[k - 1]
        plus_counts: list[int] = []
        for a in _AXES:
            cand = BasisString(tuple(prefix) + (a,) + (Axis.X,) * (n - k))
            if record:
                bits = stream.draw_outcomes(cand, m_k)
                chunks.append((cand.codes(), bits))
                odd = (bits[:, :k].sum(axis=1) & 1).astype(bool)
                plus_counts.append(int(m_k - odd.sum()))
            else:
                plus_counts.append(stream.prefix_plus_count(cand, k, m_k))
        mu = instance.profile.coefficient(k)
        prefix.append(_AXES[_stage_decision(rule, plus_counts, m_k, mu)])
    total = 3 * sum(budgets)
    if record:
        bases = np.vstack([np.broadcast_to(c, b.shape).copy() for c, b in chunks])
        outcomes = np.vstack([b for _, b in chunks])
        transcript = Transcript(n, total, bases, outcomes)
    else:
        transcript = Transcript(n, total)
    return ProtocolResult(BasisString(tuple(prefix)), transcript, per_stage_shots=budgets)


@lru_cache(maxsize=8)
def _basis_code_matrix(n: int) -> np.ndarray:
    """All 3^n basis strings as a (3^n, n) uint8 matrix in lexicographic order."""
    reps = np.arange(3**n, dtype=np.int64)
    cols = []
    for i in range(n):
        cols.append((reps // 3 ** (n - 1 - i)) % 3)
    return np.stack(cols, axis=1).astype(np.uint8)


def _signature_loglik_table(coeffs: np.ndarray, n: int) -> np.ndarray:
    """W[L, sig] = log(1 + sum_{j<=L} c_j * pi_j(sig)), the per-shot log-likelihood
    (up to the common -n log 2) for a hypothesis matching the shot's basis to
    depth L.  Zero-probability cells get a large negative sentinel so that
    impossible hypotheses lose every comparison without producing NaNs."""
    sig = np.arange(1 << n, dtype=np.int64)
    acc = np.ones(1 << n, dtype=np.float64)
    table = np.zeros((n + 1, 1 << n), dtype=np.float64)
    for j in range(1, n + 1):
        pi_j = 1.0 - 2.0 * ((sig >> (j - 1)) & 1)
        acc = acc + coeffs[j - 1] * pi_j
        table[j] = np.where(acc > 0.0, np.log(np.maximum(acc, 1e-300)), -1e12)
    return table


def _hypothesis_loglikelihoods(counts: np.ndarray, coeffs: np.ndarray, n: int) -> np.ndarray:
    """Log-likelihood of every hypothesis given per-(basis, signature) counts.

    Exploits that a shot's contribution depends on its basis b and hypothesis
    h only through lcp(b, h), and that bases sharing a prefix with h form
    contiguous lexicographic blocks: with A[b, L] the summed W-contribution
    of basis b at match depth L, prefix-block partial sums of A's columns
    assemble all 3^n totals in O(3^n n).
    """
    n_bases = counts.shape[0]
    table = _signature_loglik_table(coeffs, n)
    a = counts.astype(np.float64) @ table.T  # (3^n, n+1)
    acum = np.cumsum(a, axis=0)

    def block_sum(col: int, start: np.ndarray, end: np.ndarray) -> np.ndarray:
        hi = acum[end - 1, col]
        lo = np.where(start > 0, acum[np.maximum(start - 1, 0), col], 0.0)
        return hi - lo

    hidx = np.arange(n_bases, dtype=np.int64)
    ll = a[hidx, n].copy()  # exact-match depth n contribution
    for j in range(n):
        outer = 3 ** (n - j)
        inner = outer // 3
        start_o = (hidx // outer) * outer
        start_i = (hidx // inner) * inner
        ll += block_sum(j, start_o, start_o + outer)
        ll -= block_sum(j, start_i, start_i + inner)
    return ll


def run_nonadaptive_uniform(
    instance: FamilyInstance,
    total_budget: int,
    stream: ShotStream | None = None,
    record: bool = False,
    max_n: int = NONADAPTIVE_CAP_N,
) -> ProtocolResult:
    """Uniform fixed design with full-family maximum-likelihood decision.

    Shot t measures basis t mod 3^n (lexicographic order), so the first
    M mod 3^n bases receive one extra shot.  The estimate is the hypothesis
    maximizing the transcript log-likelihood; ties go to the
    lexicographically smallest string.
    """
    n = instance.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the non-adaptive enumeration cap {max_n}")
    if total_budget < 1:
        raise ValueError("total budget must be >= 1")
    if stream is None:
        stream = ShotStream(instance)
    n_bases = 3**n
    base_q, extra = divmod(total_budget, n_bases)
    codes = _basis_code_matrix(n)
    first_shot = stream.counter
    counts = np.zeros((n_bases, 1 << n), dtype=np.int64)
    bits_all = np.empty((total_budget, n), dtype=np.uint8) if record else None
    for i in range(n_bases):
        m_i = base_q + (1 if i < extra else 0)
        if m_i == 0:
            continue
        b = BasisString.from_codes(codes[i])
        if record:
            bits = stream.draw_outcomes_strided(b, m_i, first_shot + i, n_bases)
            bits_all[i::n_bases] = bits
            signs_run = np.cumprod(1 - 2 * bits.astype(np.int64), axis=1)
            sig = ((signs_run < 0).astype(np.int64) << np.arange(n, dtype=np.int64)).sum(axis=1)
            counts[i] = np.bincount(sig, minlength=1 << n)
        else:
            counts[i] = stream.signature_counts_strided(b, m_i, first_shot + i, n_bases)
    stream.advance(total_budget)
    ll = _hypothesis_loglikelihoods(counts, instance.profile.coefficients(), n)
    estimate = BasisString.from_index(n, int(np.argmax(ll)))
    if record:
        bases_rows = codes[np.arange(total_budget) % n_bases]
        transcript = Transcript(n, total_budget, bases_rows, bits_all)
    else:
        transcript = Transcript(n, total_budget)
    return ProtocolResult(estimate, transcript)


def _record_log_probs(transcript: Transcript, instance: FamilyInstance) -> np.ndarray:
    """Per-record log p(outcome | basis, instance), vectorized over the transcript."""
    coeffs = instance.profile.coefficients()
    n = transcript.n
    codes = transcript.basis_codes
    bits = transcript.outcome_bits
    hid = instance.hidden.codes()
    mismatch = codes != hid[None, :]
    lcp = np.where(mismatch.any(axis=1), mismatch.argmax(axis=1), n)
    signs_run = np.cumprod(1.0 - 2.0 * bits.astype(np.float64), axis=1)
    depth_ok = np.arange(1, n + 1)[None, :] <= lcp[:, None]
    acc = 1.0 + (signs_run * coeffs[None, :] * depth_ok).sum(axis=1)
    with np.errstate(divide="ignore"):
        return np.where(acc > 0.0, np.log(np.maximum(acc, 1e-300)), -np.inf)


def two_point_test(
    transcript: Transcript, h0: FamilyInstance, h1: FamilyInstance
) -> FamilyInstance:
    """Transcript likelihood-ratio test between two family members.

    Returns h1 iff the summed per-record log ratio is strictly positive;
    ties (including the empty transcript) return h0.
    """
    if h0.profile != h1.profile:
        raise ValueError("two-point test requires a shared coefficient profile")
    if transcript.total_shots == 0:
        return h0
    if not transcript.recorded:
        raise ValueError("two-point test needs a recorded transcript")
    log_p0 = _record_log_probs(transcript, h0)
    log_p1 = _record_log_probs(transcript, h1)
    llr = float(np.sum(log_p1 - log_p0))
    return h1 if llr > 0.0 else h0
