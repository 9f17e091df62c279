"""Monte Carlo experiment drivers: success estimation, minimal-budget
search, curve fitting, the self-check suite, and CSV/SVG emission.

Per-trial randomness is derived, not shared: trial t of a point
(protocol, n, knob) gets its hidden string from
``draw_u64(derive_key(seed, proto_id, n, knob, t), 0)`` and its shot stream
from ``derive_key(seed, proto_id, n, knob, t, 1)``, so every point is an
independent, exactly reproducible experiment regardless of evaluation
order.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import analysis, oracle
from ._backend import active_backend
from ._prng import derive_key, draw_u64
from .family import (
    BasisString,
    CoefficientProfile,
    FamilyInstance,
    Outcome,
    check_physicality,
    corollary_profile,
    enumerate_bases,
    hard_pair_trace_distance,
    outcome_distribution,
    state_eigenvalues,
)
from .protocols import (
    NONADAPTIVE_CAP_N,
    StageRule,
    run_adaptive,
    run_nonadaptive_uniform,
    theorem1_stage_budget,
)
from .sampling import ShotStream

PROTOCOLS = ("adaptive-llr", "adaptive-argmax", "nonadaptive-uniform")

CSV_HEADER = "protocol,n,epsilon,eta,budget,success_rate,ci_low,ci_high,trials,seed"

WILSON_Z = 1.96  # 95% interval
THRESHOLD_SLACK = 0.02  # budget search passes on Wilson low >= threshold - slack


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple[int, ...]
    protocol: str = "adaptive-llr"
    epsilon: float = 0.5
    eta: float = 0.1
    success_threshold: float = 0.90
    trials_per_point: int = 500
    seed: int = 0
    budget_ceiling: int = 1 << 26  # cap on a point's total shots during search
    theorem_allocation: bool = False  # adaptive stage shots shaped like 1/mu_k^2
    fixed_hidden: str | None = None  # pin b* instead of drawing per trial

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be nonempty positive integers")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if self.protocol == "nonadaptive-uniform" and max(self.n_values) > NONADAPTIVE_CAP_N:
            raise ValueError(
                f"nonadaptive protocol is capped at n <= {NONADAPTIVE_CAP_N}, "
                f"got n={max(self.n_values)}"
            )
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0,1), got {self.eta}")
        if not 0.0 < self.success_threshold < 1.0:
            raise ValueError(f"success_threshold must lie in (0,1), got {self.success_threshold}")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if self.budget_ceiling < 1:
            raise ValueError("budget_ceiling must be >= 1")
        if self.fixed_hidden is not None:
            BasisString.from_str(self.fixed_hidden)  # validates symbols

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "protocol": self.protocol,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "success_threshold": self.success_threshold,
            "trials_per_point": self.trials_per_point,
            "seed": self.seed,
            "budget_ceiling": self.budget_ceiling,
            "theorem_allocation": self.theorem_allocation,
            "fixed_hidden": self.fixed_hidden,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "n_values" not in data:
            raise ValueError("config requires n_values")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        return cls.from_dict(data)

    def overridden(self, **changes) -> "ExperimentConfig":
        """Copy with non-None entries of ``changes`` replacing fields."""
        effective = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **effective) if effective else self


class SuccessEstimate:
    """Empirical success rate with its Wilson 95% interval."""

    __slots__ = ("rate", "ci_low", "ci_high", "trials", "successes")

    def __init__(self, successes: int, trials: int):
        self.successes = successes
        self.trials = trials
        self.rate = successes / trials
        self.ci_low, self.ci_high = wilson_interval(successes, trials)

    def __repr__(self) -> str:
        return (
            f"SuccessEstimate(rate={self.rate:.4f}, "
            f"ci=[{self.ci_low:.4f}, {self.ci_high:.4f}], trials={self.trials})"
        )


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _proto_id(protocol: str) -> int:
    return PROTOCOLS.index(protocol)


def _stage_vector(config: ExperimentConfig, profile: CoefficientProfile, knob: int) -> tuple[int, ...]:
    """Per-stage shots for the adaptive knob: equal by default, or shaped
    proportionally to 1/mu_k^2 (same total) behind the flag."""
    n = profile.n
    if not config.theorem_allocation:
        return (knob,) * n
    w = 1.0 / profile.coefficients() ** 2
    scaled = knob * n * w / w.sum()
    return tuple(max(1, int(round(s))) for s in scaled)


def total_budget(config: ExperimentConfig, n: int, knob: int) -> int:
    """Total shot count implied by a protocol's budget knob value."""
    if config.protocol == "nonadaptive-uniform":
        return knob
    profile = corollary_profile(n, config.epsilon)
    return 3 * sum(_stage_vector(config, profile, knob))


def _hidden_for_trial(config: ExperimentConfig, n: int, knob: int, trial: int) -> BasisString:
    if config.fixed_hidden is not None:
        hidden = BasisString.from_str(config.fixed_hidden)
        if len(hidden) != n:
            raise ValueError(f"fixed_hidden has length {len(hidden)}, point has n={n}")
        return hidden
    key = derive_key(config.seed, _proto_id(config.protocol), n, knob, trial)
    return BasisString.from_index(n, int(draw_u64(key, 0) % 3**n))


def estimate_success(config: ExperimentConfig, n: int, knob: int) -> SuccessEstimate:
    """Monte Carlo exact-recovery rate at one (n, budget-knob) point.

    The knob is per-stage shots for adaptive protocols and the total shot
    count for the uniform design.  Each trial draws a fresh hidden string
    (uniform over the family unless pinned) and an independent stream.
    """
    if knob < 1:
        raise ValueError("budget knob must be >= 1")
    profile = corollary_profile(n, config.epsilon)
    adaptive = config.protocol != "nonadaptive-uniform"
    rule = StageRule.ARGMAX_ABS if config.protocol == "adaptive-argmax" else StageRule.LLR
    stage_vec = _stage_vector(config, profile, knob) if adaptive else None
    wins = 0
    for trial in range(config.trials_per_point):
        hidden = _hidden_for_trial(config, n, knob, trial)
        instance = FamilyInstance(profile, hidden)
        stream_seed = derive_key(config.seed, _proto_id(config.protocol), n, knob, trial, 1)
        stream = ShotStream(instance, seed=stream_seed)
        if adaptive:
            result = run_adaptive(
                instance, rule=rule, shots_per_stage=stage_vec, stream=stream, record=False
            )
        else:
            result = run_nonadaptive_uniform(instance, knob, stream=stream, record=False)
        result.correct = result.estimate == hidden
        wins += result.correct
    return SuccessEstimate(wins, config.trials_per_point)


@dataclass(frozen=True)
class BudgetEvaluation:
    knob: int
    budget: int
    estimate: SuccessEstimate


@dataclass
class MinimalBudget:
    """Outcome of the budget search at one n: smallest tested knob whose
    Wilson lower bound clears threshold - 0.02, or a failure record."""

    n: int
    found: bool
    knob: int | None
    budget: int | None
    estimate: SuccessEstimate | None
    evaluations: tuple[BudgetEvaluation, ...]
    ceiling: int


def minimal_budget(config: ExperimentConfig, n: int, initial_knob: int = 1) -> MinimalBudget:
    """Doubling-then-bisection search for the smallest passing budget knob.

    Doubles the knob until the Wilson lower bound clears
    ``success_threshold - 0.02`` (walking down first if the initial guess
    already passes), then bisects until the bracket is within 5% relative
    width.  Exceeding ``budget_ceiling`` (in total shots) before any pass
    produces an explicit failure record instead of an answer.
    """
    bar = config.success_threshold - THRESHOLD_SLACK
    cache: dict[int, BudgetEvaluation] = {}

    def evaluate(knob: int) -> BudgetEvaluation:
        if knob not in cache:
            cache[knob] = BudgetEvaluation(knob, total_budget(config, n, knob), estimate_success(config, n, knob))
        return cache[knob]

    def passes(knob: int) -> bool:
        return evaluate(knob).estimate.ci_low >= bar

    def result(found: bool, knob: int | None) -> MinimalBudget:
        evals = tuple(sorted(cache.values(), key=lambda e: e.knob))
        if not found:
            return MinimalBudget(n, False, None, None, None, evals, config.budget_ceiling)
        ev = cache[knob]
        return MinimalBudget(n, True, knob, ev.budget, ev.estimate, evals, config.budget_ceiling)

    knob = max(1, initial_knob)
    if passes(knob):
        # walk down to bracket from above
        hi, lo = knob, 0
        while hi > 1:
            cand = hi // 2
            if passes(cand):
                hi = cand
            else:
                lo = cand
                break
        if lo == 0:
            return result(True, hi)  # passes at knob 1
    else:
        lo = knob
        while True:
            knob *= 2
            if total_budget(config, n, knob) > config.budget_ceiling:
                return result(False, None)
            if passes(knob):
                hi = knob
                break
            lo = knob
    while (hi - lo) > 1 and (hi - lo) > 0.05 * hi:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return result(True, hi)


@dataclass(frozen=True)
class CurvePoint:
    n: int
    budget: int
    success_rate: float
    ci_low: float
    ci_high: float
    trials: int


@dataclass(frozen=True)
class CubicFit:
    coefficients: tuple[float, float, float, float]  # highest degree first
    r_squared: float


@dataclass(frozen=True)
class ExponentialFit:
    amplitude: float
    base: float
    r_squared: float  # on the log scale

    def value(self, n: float) -> float:
        return self.amplitude * self.base**n


@dataclass
class BudgetCurve:
    protocol: str
    epsilon: float
    eta: float
    seed: int
    points: list[CurvePoint] = field(default_factory=list)
    failures: list[MinimalBudget] = field(default_factory=list)
    fit: CubicFit | ExponentialFit | None = None


def run_sweep(config: ExperimentConfig) -> BudgetCurve:
    """Minimal budget per n over the config's sweep, warm-starting each
    search from the previous n's answer.  Unreachable points become failure
    records rather than curve points."""
    curve = BudgetCurve(config.protocol, config.epsilon, config.eta, config.seed)
    guess = 1
    for n in sorted(set(config.n_values)):
        res = minimal_budget(config, n, initial_knob=guess)
        if res.found:
            est = res.estimate
            curve.points.append(
                CurvePoint(n, res.budget, est.rate, est.ci_low, est.ci_high, est.trials)
            )
            guess = max(1, res.knob // 2)
        else:
            curve.failures.append(res)
    budgets = [p.budget for p in curve.points]
    if any(b2 < b1 for b1, b2 in zip(budgets, budgets[1:])):
        warnings.warn(
            f"minimal budgets are not monotone in n for {config.protocol}: {budgets}",
            RuntimeWarning,
            stacklevel=2,
        )
    return curve


def _r_squared(y: np.ndarray, predicted: np.ndarray) -> float:
    resid = y - predicted
    ss_res = float(resid @ resid)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        return 1.0 if ss_res <= 1e-30 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_curves(curve: BudgetCurve, kind: str | None = None) -> BudgetCurve:
    """Attach a least-squares fit: cubic in n for adaptive curves,
    exponential (linear in log budget) for the uniform design.

    Points with fewer than 100 trials are excluded from fitting.
    """
    if kind is None:
        kind = "exponential" if curve.protocol == "nonadaptive-uniform" else "cubic"
    pts = [p for p in curve.points if p.trials >= 100]
    xs = np.array([p.n for p in pts], dtype=np.float64)
    ys = np.array([p.budget for p in pts], dtype=np.float64)
    if kind == "cubic":
        if len(pts) < 4:
            raise ValueError(f"cubic fit needs >= 4 points with >= 100 trials, have {len(pts)}")
        coeffs = np.polyfit(xs, ys, 3)
        fit = CubicFit(tuple(float(c) for c in coeffs), _r_squared(ys, np.polyval(coeffs, xs)))
    elif kind == "exponential":
        if len(pts) < 3:
            raise ValueError(f"exponential fit needs >= 3 points with >= 100 trials, have {len(pts)}")
        if np.any(ys <= 0.0):
            raise ValueError("exponential fit requires positive budgets")
        logs = np.log(ys)
        slope, intercept = np.polyfit(xs, logs, 1)
        fit = ExponentialFit(
            float(np.exp(intercept)), float(np.exp(slope)), _r_squared(logs, slope * xs + intercept)
        )
    else:
        raise ValueError(f"unknown fit kind {kind!r}")
    return BudgetCurve(
        curve.protocol, curve.epsilon, curve.eta, curve.seed,
        list(curve.points), list(curve.failures), fit,
    )


# ---------------------------------------------------------------------------
# self-check suite


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float  # room to the tolerance; negative = failed by that much
    detail: str


@dataclass(frozen=True)
class VerificationReport:
    max_n: int
    seed: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def format_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            lines.append(f"{tag} {c.name:<26} margin={c.margin:+.3e}  {c.detail}")
        lines.append(
            f"{'OK' if self.passed else 'FAILED'}: "
            f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed"
        )
        return lines

    def to_dict(self) -> dict:
        return {
            "max_n": self.max_n,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "margin": c.margin, "detail": c.detail}
                for c in self.checks
            ],
        }


def _random_physical_profile(rng: np.random.Generator, n: int) -> CoefficientProfile:
    # random direction in coefficient space scaled to a random total weight < 1
    raw = rng.standard_normal(n)
    raw /= np.abs(raw).sum()
    raw *= rng.uniform(0.2, 0.98)
    return CoefficientProfile(alpha=float(raw[-1]), betas=tuple(float(x) for x in raw[:-1]))


def _random_hard_pair(rng: np.random.Generator, n: int, epsilon: float | None = None) -> analysis.HardPair:
    eps = epsilon if epsilon is not None else float(rng.uniform(0.2, 0.9))
    prefix = BasisString.from_index(n - 1, int(rng.integers(3 ** (n - 1))))
    return analysis.HardPair(corollary_profile(n, eps), prefix)


def _outcome_index_matrix(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    powers = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ powers


def verify_all(max_n: int = 4, seed: int = 0) -> VerificationReport:
    """Run every cross-module consistency check and report margins.

    Failures never raise; they land in the report (the CLI maps them to a
    nonzero exit code).  ``max_n`` bounds the dense-matrix comparisons and
    must stay within the oracle cap.
    """
    if not 1 <= max_n <= oracle.MATRIX_CAP_N:
        raise ValueError(f"max_n must lie in [1, {oracle.MATRIX_CAP_N}], got {max_n}")
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = []

    def run_check(name: str, fn) -> None:
        try:
            margin, detail, passed = fn()
        except Exception as exc:  # noqa: BLE001 - report, never crash the suite
            checks.append(CheckResult(name, False, -math.inf, f"exception: {exc!r}"))
            return
        # numpy scalars leak in from comparisons; keep the report JSON-clean
        checks.append(CheckResult(name, bool(passed), float(margin), detail))

    def check_born() -> tuple[float, str, bool]:
        tol, worst = 1e-12, 0.0
        count = 0
        for n in range(1, max_n + 1):
            for _ in range(6):
                inst = FamilyInstance(
                    _random_physical_profile(rng, n), BasisString.from_index(n, int(rng.integers(3**n)))
                )
                state = oracle.build_state(inst)
                for b in enumerate_bases(n):
                    closed = outcome_distribution(inst, b)
                    for o_idx in range(2**n):
                        proj = oracle.build_projector(b, Outcome.from_index(n, o_idx))
                        dense = oracle.born_probability(state, proj)
                        worst = max(worst, abs(closed[o_idx] - dense))
                        count += 1
        return tol - worst, f"max |closed-dense| = {worst:.3e} over {count} probabilities", worst <= tol

    run_check("born-closed-form", check_born)

    def check_spectrum() -> tuple[float, str, bool]:
        tol, worst, min_eig = 1e-10, 0.0, math.inf
        for n in range(1, max_n + 1):
            for _ in range(4):
                inst = FamilyInstance(
                    _random_physical_profile(rng, n), BasisString.from_index(n, int(rng.integers(3**n)))
                )
                fast = np.sort(state_eigenvalues(inst))
                dense = oracle.hermitian_eig(oracle.build_state(inst)).eigenvalues
                worst = max(worst, float(np.max(np.abs(fast - dense))))
                min_eig = min(min_eig, float(fast.min()))
        ok = worst <= tol and min_eig >= -1e-12
        return tol - worst, f"max eigenvalue gap {worst:.3e}, min eigenvalue {min_eig:.3e}", ok

    run_check("spectrum-match", check_spectrum)

    def check_trace_distance() -> tuple[float, str, bool]:
        tol, worst = 1e-10, 0.0
        values = []
        for n in range(2, max_n + 1):
            pair = _random_hard_pair(rng, n)
            dense = oracle.trace_distance(
                oracle.build_state(pair.instance0), oracle.build_state(pair.instance1)
            )
            target = hard_pair_trace_distance(pair.profile.alpha)
            values.append(f"n={n}: {dense:.12f} vs |alpha|/sqrt(2)={target:.12f}")
            worst = max(worst, abs(dense - target))
        return tol - worst, "; ".join(values), worst <= tol

    run_check("hard-pair-trace-distance", check_trace_distance)

    def check_physicality_negative() -> tuple[float, str, bool]:
        bad = CoefficientProfile(alpha=0.5, betas=(0.4, 0.3))  # sums to 1.2
        report = check_physicality(bad)
        rejected = not report.physical
        try:
            ShotStream(FamilyInstance(bad, BasisString.from_str("XYZ")))
            sampler_refused = False
        except ValueError:
            sampler_refused = True
        ok = rejected and sampler_refused
        return (
            -report.margin,
            "unphysical profile rejected; dependent sampling skipped for it",
            ok,
        )

    run_check("physicality-negative", check_physicality_negative)

    def check_zero_kl() -> tuple[float, str, bool]:
        worst = 0.0
        n_pairs = 0
        for n in range(2, min(max_n, 5) + 1):
            for _ in range(3):
                pair = _random_hard_pair(rng, n)
                n_pairs += 1
                for b in enumerate_bases(n):
                    if b in (pair.basis0, pair.basis1):
                        continue
                    worst = max(worst, abs(analysis.one_shot_kl(pair.instance0, pair.instance1, b)))
        return 1e-15 - worst, f"max off-signal KL {worst:.3e} over {n_pairs} pairs", worst <= 1e-15

    run_check("zero-kl-set", check_zero_kl)

    def check_contraction() -> tuple[float, str, bool]:
        worst_gap = math.inf
        for n in range(2, min(max_n, 5) + 1):
            pair = _random_hard_pair(rng, n)
            allocations = [analysis.Allocation.uniform(n)]
            for _ in range(5):
                allocations.append(analysis.Allocation(n, rng.dirichlet(np.ones(3**n))))
            for alloc in allocations:
                exact, cap = analysis.transcript_kl_bound(alloc, 1000, pair)
                tight = (
                    1000
                    * (alloc.weight(pair.basis0) + alloc.weight(pair.basis1))
                    * pair.profile.alpha**2
                    / pair.delta
                )
                worst_gap = min(worst_gap, cap - exact, tight - exact)
        return worst_gap, f"min (bound - exact) = {worst_gap:.3e}", worst_gap >= -1e-15

    run_check("kl-contraction", check_contraction)

    def check_pigeonhole() -> tuple[float, str, bool]:
        worst = -math.inf
        for _ in range(40):
            n = int(rng.integers(2, max_n + 1))
            alloc = analysis.Allocation(n, rng.dirichlet(np.ones(3**n) * float(rng.uniform(0.2, 3.0))))
            _, mass = analysis.rare_cylinder(alloc)
            worst = max(worst, mass - 3.0 ** (-(n - 1)))
        return 1e-12 - worst, f"max (mass - 3^-(n-1)) = {worst:.3e}", worst <= 1e-12

    run_check("pigeonhole", check_pigeonhole)

    def check_baseline_floor() -> tuple[float, str, bool]:
        worst = math.inf
        for n in range(2, max_n + 1):
            pair = _random_hard_pair(rng, n)
            base = pair.prefix_only()
            for b in (pair.basis0, pair.basis1, BasisString.from_index(n, int(rng.integers(3**n)))):
                floor = float(outcome_distribution(base, b).min()) * 2**n
                worst = min(worst, floor - pair.delta)
        return worst, f"min (2^n p_min - delta) = {worst:.3e}", worst >= -1e-12

    run_check("baseline-floor", check_baseline_floor)

    def check_kl_series() -> tuple[float, str, bool]:
        worst = 0.0
        for a in np.linspace(-0.2, 0.2, 81):
            if a == 0.0:
                continue
            dev = abs(analysis.kl_alpha(float(a)) / (a * a) - 0.5) - a * a
            worst = max(worst, float(dev))
        return -worst, f"max series-bound excess {worst:.3e}", worst <= 0.0

    run_check("kl-alpha-series", check_kl_series)

    def check_testing_bound() -> tuple[float, str, bool]:
        worst = math.inf
        for eta in (0.25, 0.1, 0.01):
            worst = min(worst, analysis.bernoulli_kl(eta, 1 - eta) - 0.25 * math.log(1 / eta))
        return worst, f"min (KL - ln(1/eta)/4) = {worst:.3e}", worst >= 0.0

    run_check("testing-bound", check_testing_bound)

    def check_budget_arithmetic() -> tuple[float, str, bool]:
        prof = corollary_profile(2, 0.5)
        stage = theorem1_stage_budget(prof, 1, 0.1)
        upper, shape = analysis.budget_formulas(prof, 0.1)
        expect_upper = 24.0 * math.log(6 * 2 / 0.1) * (64.0 + 64.0)
        shape3 = analysis.budget_formulas(corollary_profile(3, 0.5), 0.1).nonadaptive_lower_shape
        ok = stage == 2452 and abs(upper - expect_upper) < 1e-9
        # tripling check is on the 3^(n-1) factor; kl(alpha) changes with the profile
        ratio = shape3 * analysis.kl_alpha(corollary_profile(3, 0.5).alpha) / (
            shape * analysis.kl_alpha(prof.alpha)
        )
        ok = ok and abs(ratio - 3.0) < 1e-9
        return (
            abs(upper - expect_upper),
            f"stage budget {stage}, adaptive upper {upper:.6f}, shape factor {ratio:.6f}",
            ok,
        )

    run_check("budget-arithmetic", check_budget_arithmetic)

    def check_sampler_band() -> tuple[float, str, bool]:
        n = min(3, max_n)
        shots = 100_000
        # union (Bonferroni) Hoeffding band at significance 1e-3 over 2^n cells
        band = math.sqrt(math.log(2.0 * 2**n / 1e-3) / (2.0 * shots))
        worst = 0.0
        for _ in range(2):
            inst = FamilyInstance(
                _random_physical_profile(rng, n), BasisString.from_index(n, int(rng.integers(3**n)))
            )
            b = BasisString.from_index(n, int(rng.integers(3**n)))
            stream = ShotStream(inst, seed=int(rng.integers(2**63)))
            bits = stream.draw_outcomes(b, shots)
            freq = np.bincount(_outcome_index_matrix(bits), minlength=2**n) / shots
            worst = max(worst, float(np.max(np.abs(freq - outcome_distribution(inst, b)))))
        return band - worst, f"max |freq - p| = {worst:.3e}, band {band:.3e}", worst <= band

    run_check("sampler-band", check_sampler_band)

    def check_prefix_statistic() -> tuple[float, str, bool]:
        n = min(4, max_n)
        inst = FamilyInstance(
            corollary_profile(n, 0.6) if n > 1 else CoefficientProfile(0.15, ()),
            BasisString.from_index(n, int(rng.integers(3**n))),
        )
        shots = 40_000
        band = math.sqrt(math.log(2.0 * 2 * n / 1e-3) / (2.0 * shots)) * 2.0  # signs live in ±1
        stream = ShotStream(inst, seed=int(rng.integers(2**63)))
        worst = 0.0
        for k in range(1, n + 1):
            mean = stream.prefix_statistic_mean(inst.hidden, k, shots)
            worst = max(worst, abs(mean - inst.profile.coefficient(k)))
        return band - worst, f"max |mean - mu_k| = {worst:.3e}, band {band:.3e}", worst <= band

    run_check("prefix-statistic-band", check_prefix_statistic)

    def check_chain_rule() -> tuple[float, str, bool]:
        n = min(3, max_n)
        if n < 2:
            return 0.0, "skipped below n=2", True
        pair = _random_hard_pair(rng, n, epsilon=0.5)
        alloc = analysis.Allocation.uniform(n)
        shots_per_transcript, trials = 100, 2000
        exact = analysis.transcript_kl_bound(alloc, shots_per_transcript, pair).exact
        base_q, extra = divmod(shots_per_transcript, 3**n)
        per_trial = np.zeros(trials)
        stream = ShotStream(pair.instance0, seed=int(rng.integers(2**63)))
        for i, b in enumerate(enumerate_bases(n)):
            m_i = base_q + (1 if i < extra else 0)
            if m_i == 0:
                continue
            p0 = outcome_distribution(pair.instance0, b)
            p1 = outcome_distribution(pair.instance1, b)
            log_ratio = np.where(p0 > 0, np.log(np.maximum(p0, 1e-300) / np.maximum(p1, 1e-300)), 0.0)
            bits = stream.draw_outcomes(b, m_i * trials)
            vals = log_ratio[_outcome_index_matrix(bits)].reshape(trials, m_i)
            per_trial += vals.sum(axis=1)
        mean = float(per_trial.mean())
        se = float(per_trial.std(ddof=1) / math.sqrt(trials))
        dev = abs(mean - exact)
        return 4 * se - dev, f"empirical {mean:.5f} vs exact {exact:.5f}, SE {se:.5f}", dev <= 4 * se

    run_check("chain-rule-consistency", check_chain_rule)

    def check_backend_equality() -> tuple[float, str, bool]:
        from . import _backend, _kernels_py

        if active_backend() != "cython":
            return 0.0, "compiled backend unavailable; pure fallback in use", True
        compiled = _backend.get_module("cython")
        for _ in range(6):
            n = int(rng.integers(1, 7))
            g = rng.uniform(-0.15, 0.15, n)
            key = int(rng.integers(2**63))
            shots = int(rng.integers(1, 400))
            shot0, stride = int(rng.integers(0, 1000)), int(rng.integers(1, 5))
            a = compiled.prefix_plus_count(g, shots, key, shot0, stride, n)
            b = _kernels_py.prefix_plus_count(g, shots, key, shot0, stride, n)
            if a != b:
                return -1.0, f"prefix_plus_count mismatch {a} != {b}", False
            out_c = np.empty((shots, n), dtype=np.uint8)
            out_p = np.empty((shots, n), dtype=np.uint8)
            compiled.sample_bits(g, shots, key, shot0, stride, n, out_c)
            _kernels_py.sample_bits(g, shots, key, shot0, stride, n, out_p)
            if not np.array_equal(out_c, out_p):
                return -1.0, "sample_bits mismatch", False
        return 0.0, "compiled and fallback kernels agree bit-for-bit", True

    run_check("backend-equality", check_backend_equality)

    def check_signal_ratio() -> tuple[float, str, bool]:
        # reported, not asserted: the quadratic KL cap needs |alpha|/delta <= 1/2
        vals = []
        worst = 0.0
        for n in range(2, max_n + 1):
            pair = analysis.HardPair(corollary_profile(n, 0.5), BasisString.from_index(n - 1, 0))
            vals.append(f"n={n}: {pair.r_max:.4f}")
            worst = max(worst, pair.r_max)
        flag = "" if worst <= 0.5 else " [exceeds 1/2: quadratic cap not guaranteed]"
        return 0.5 - worst, "|alpha|/delta " + ", ".join(vals) + flag, True

    run_check("signal-ratio-report", check_signal_ratio)

    return VerificationReport(max_n, seed, tuple(checks))


# ---------------------------------------------------------------------------
# output emission


def _csv_row(curve: BudgetCurve, p: CurvePoint) -> str:
    return ",".join(
        [
            curve.protocol,
            str(p.n),
            repr(curve.epsilon),
            repr(curve.eta),
            str(p.budget),
            repr(p.success_rate),
            repr(p.ci_low),
            repr(p.ci_high),
            str(p.trials),
            str(curve.seed),
        ]
    )


def emit_outputs(curves: list[BudgetCurve], out_dir: str) -> list[str]:
    """Write sweep.csv plus one SVG per available figure into out_dir.

    Figures: adaptive budget vs n with its cubic fit, non-adaptive budget
    vs n with its exponential fit (log y), and a direct comparison (log y)
    when both protocol classes are present.  Empty input still produces the
    CSV header.  Returns the written paths.
    """
    import os

    from . import svgplot

    written: list[str] = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "sweep.csv")
        lines = [CSV_HEADER]
        for curve in curves:
            for p in curve.points:
                lines.append(_csv_row(curve, p))
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(csv_path)

        def fit_series(curve: BudgetCurve, color: str) -> svgplot.Series | None:
            if curve.fit is None or not curve.points:
                return None
            ns = np.linspace(curve.points[0].n, curve.points[-1].n, 60)
            if isinstance(curve.fit, CubicFit):
                ys = np.polyval(np.array(curve.fit.coefficients), ns)
                label = f"cubic fit (R2={curve.fit.r_squared:.3f})"
            else:
                ys = curve.fit.amplitude * curve.fit.base**ns
                label = f"exp fit base {curve.fit.base:.2f} (R2={curve.fit.r_squared:.3f})"
            ys = np.maximum(ys, 1.0)  # fits can dip below the log floor at the edges
            return svgplot.Series(label, list(ns), list(ys), color, markers=False, dashed=True)

        def point_series(curve: BudgetCurve, color: str) -> svgplot.Series:
            return svgplot.Series(
                curve.protocol,
                [p.n for p in curve.points],
                [float(p.budget) for p in curve.points],
                color,
            )

        palette = {"adaptive-llr": "#1f6fb2", "adaptive-argmax": "#7b3fb2", "nonadaptive-uniform": "#b2501f"}
        adaptive = [c for c in curves if c.protocol != "nonadaptive-uniform" and c.points]
        nonadaptive = [c for c in curves if c.protocol == "nonadaptive-uniform" and c.points]

        if adaptive:
            series = []
            for c in adaptive:
                color = palette[c.protocol]
                series.append(point_series(c, color))
                fs = fit_series(c, color)
                if fs:
                    series.append(fs)
            path = os.path.join(out_dir, "fig_adaptive.svg")
            svgplot.write_svg(
                path,
                svgplot.render_line_plot(
                    series, "Adaptive minimal budget vs n", "n", "total shots"
                ),
            )
            written.append(path)

        if nonadaptive:
            series = []
            for c in nonadaptive:
                color = palette[c.protocol]
                series.append(point_series(c, color))
                fs = fit_series(c, color)
                if fs:
                    series.append(fs)
            path = os.path.join(out_dir, "fig_nonadaptive.svg")
            svgplot.write_svg(
                path,
                svgplot.render_line_plot(
                    series, "Non-adaptive minimal budget vs n", "n", "total shots", log_y=True
                ),
            )
            written.append(path)

        if adaptive and nonadaptive:
            series = [point_series(c, palette[c.protocol]) for c in adaptive + nonadaptive]
            path = os.path.join(out_dir, "fig_comparison.svg")
            svgplot.write_svg(
                path,
                svgplot.render_line_plot(
                    series, "Adaptive vs non-adaptive minimal budget", "n", "total shots", log_y=True
                ),
            )
            written.append(path)
    except OSError as exc:
        raise OSError(f"failed writing outputs under {out_dir!r}: {exc}") from exc
    return written
