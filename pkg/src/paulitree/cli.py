"""Command-line front end.

Subcommands:

* ``verify``  - run the cross-module self-check suite.
* ``sweep``   - minimal-budget search over a list of n, with curve fit and
  CSV/SVG outputs.
* ``run``     - Monte Carlo success estimate at one (protocol, n, budget).
* ``bounds``  - print the closed-form budget formulas for a profile.

A JSON config file (``--config``) mirrors ExperimentConfig; explicit flags
override file values.  Exit codes: 0 success, 1 verification failure,
2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analysis, harness
from ._backend import active_backend
from .family import corollary_profile
from .protocols import theorem1_budgets

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paulitree",
        description="Simulation lab for adaptive vs non-adaptive recovery of prefix-structured states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the self-check suite")
    p_verify.add_argument("--max-n", type=int, default=4, help="largest n for dense-matrix checks")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--json", action="store_true", help="emit the report as JSON")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file mirroring the experiment config")
    common.add_argument("--protocol", choices=harness.PROTOCOLS)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--eta", type=float)
    common.add_argument("--threshold", type=float, dest="success_threshold")
    common.add_argument("--trials", type=int, dest="trials_per_point")
    common.add_argument("--seed", type=int)
    common.add_argument("--ceiling", type=int, dest="budget_ceiling")
    common.add_argument("--hidden", dest="fixed_hidden", help="pin the hidden string")
    common.add_argument(
        "--theorem-allocation",
        action="store_const",
        const=True,
        dest="theorem_allocation",
        help="shape adaptive stage shots like 1/mu_k^2 instead of equal",
    )

    p_sweep = sub.add_parser("sweep", parents=[common], help="minimal-budget sweep over n")
    p_sweep.add_argument("--n-list", help="comma-separated qubit counts, e.g. 2,3,4")
    p_sweep.add_argument("--out", required=True, help="output directory for CSV/SVG")

    p_run = sub.add_parser("run", parents=[common], help="success estimate at one budget")
    p_run.add_argument("--n", type=int, required=True)
    p_run.add_argument(
        "--budget",
        type=int,
        required=True,
        help="total shots; adaptive runs use the largest 3*n*m that fits",
    )

    p_bounds = sub.add_parser("bounds", help="print closed-form budget formulas")
    p_bounds.add_argument("--n", type=int, required=True)
    p_bounds.add_argument("--epsilon", type=float, default=0.5)
    p_bounds.add_argument("--eta", type=float, default=0.1)

    return parser


def _parse_n_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValueError(f"bad n list {text!r}: {exc}") from exc
    if not values:
        raise ValueError("empty n list")
    return values


def _config_from_args(args: argparse.Namespace, n_values: tuple[int, ...]) -> harness.ExperimentConfig:
    overrides = {
        "protocol": args.protocol,
        "epsilon": args.epsilon,
        "eta": args.eta,
        "success_threshold": args.success_threshold,
        "trials_per_point": args.trials_per_point,
        "seed": args.seed,
        "budget_ceiling": args.budget_ceiling,
        "theorem_allocation": args.theorem_allocation,
        "fixed_hidden": args.fixed_hidden,
    }
    if args.config:
        base = harness.ExperimentConfig.from_file(args.config)
        if n_values:
            overrides["n_values"] = n_values
        return base.overridden(**overrides)
    if not n_values:
        raise ValueError("an n list is required (flag or config file)")
    effective = {k: v for k, v in overrides.items() if v is not None}
    return harness.ExperimentConfig(n_values=n_values, **effective)


def _cmd_verify(args: argparse.Namespace) -> int:
    report = harness.verify_all(max_n=args.max_n, seed=args.seed)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(f"backend: {active_backend()}")
        for line in report.format_lines():
            print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _cmd_sweep(args: argparse.Namespace) -> int:
    n_values = _parse_n_list(args.n_list) if args.n_list else ()
    config = _config_from_args(args, n_values)
    curve = harness.run_sweep(config)
    try:
        curve = harness.fit_curves(curve)
    except ValueError as exc:
        print(f"fit skipped: {exc}", file=sys.stderr)
    for p in curve.points:
        print(
            f"n={p.n}: budget {p.budget} (rate {p.success_rate:.3f}, "
            f"CI [{p.ci_low:.3f}, {p.ci_high:.3f}], trials {p.trials})"
        )
    for fail in curve.failures:
        print(f"n={fail.n}: threshold unreachable below ceiling {fail.ceiling}")
    if isinstance(curve.fit, harness.CubicFit):
        c = ", ".join(f"{v:.4g}" for v in curve.fit.coefficients)
        print(f"cubic fit [{c}] R2={curve.fit.r_squared:.4f}")
    elif isinstance(curve.fit, harness.ExponentialFit):
        print(
            f"exponential fit {curve.fit.amplitude:.4g} * {curve.fit.base:.4f}^n "
            f"R2={curve.fit.r_squared:.4f} (log scale)"
        )
    written = harness.emit_outputs([curve], args.out)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args, (args.n,))
    n = args.n
    if config.protocol == "nonadaptive-uniform":
        knob = args.budget
    else:
        knob = args.budget // (3 * n)
        if knob < 1:
            raise ValueError(f"budget {args.budget} cannot fund one shot per stage candidate (needs >= {3 * n})")
    est = harness.estimate_success(config, n, knob)
    total = harness.total_budget(config, n, knob)
    print(
        f"{config.protocol} n={n} budget={total}: rate {est.rate:.4f}, "
        f"Wilson 95% [{est.ci_low:.4f}, {est.ci_high:.4f}], trials {est.trials}"
    )
    return EXIT_OK


def _cmd_bounds(args: argparse.Namespace) -> int:
    profile = corollary_profile(args.n, args.epsilon)
    formulas = analysis.budget_formulas(profile, args.eta)
    stage = theorem1_budgets(profile, args.eta)
    total = 3 * sum(stage)
    print(f"profile: n={args.n}, epsilon={args.epsilon}, eta={args.eta}")
    print(f"per-stage shot budgets: {list(stage)}")
    print(f"stagewise total (3 * sum m_k): {total}")
    print(f"adaptive upper bound: {formulas.adaptive_upper:.4f}")
    print(f"nonadaptive lower-bound shape 3^(n-1) ln(1/eta)/kl(alpha): {formulas.nonadaptive_lower_shape:.4f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "verify": _cmd_verify,
        "sweep": _cmd_sweep,
        "run": _cmd_run,
        "bounds": _cmd_bounds,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
