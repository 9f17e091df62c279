import json
import math

import numpy as np
import pytest

from paulitree.family import corollary_profile
from paulitree.harness import (
    CSV_HEADER,
    BudgetCurve,
    CubicFit,
    CurvePoint,
    ExperimentConfig,
    ExponentialFit,
    MinimalBudget,
    SuccessEstimate,
    _stage_vector,
    emit_outputs,
    estimate_success,
    fit_curves,
    minimal_budget,
    run_sweep,
    total_budget,
    verify_all,
    wilson_interval,
)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig(n_values=(2, 3))
        assert cfg.protocol == "adaptive-llr"
        assert cfg.trials_per_point == 500
        assert cfg.n_values == (2, 3)

    def test_json_round_trip(self, tmp_path):
        cfg = ExperimentConfig(
            n_values=(2, 4), protocol="nonadaptive-uniform", epsilon=0.7, trials_per_point=42
        )
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.from_file(str(path)) == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_dict({"n_values": [2], "shots": 5})
        with pytest.raises(ValueError, match="n_values"):
            ExperimentConfig.from_dict({"protocol": "adaptive-llr"})

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=())
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(0,))
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(2,), protocol="magic")
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(10,), protocol="nonadaptive-uniform")
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(2,), epsilon=1.0)
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(2,), eta=0.0)
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(2,), success_threshold=1.5)
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(2,), trials_per_point=0)
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(2,), budget_ceiling=0)
        with pytest.raises(ValueError):
            ExperimentConfig(n_values=(2,), fixed_hidden="XQ")

    def test_overridden_ignores_none(self):
        cfg = ExperimentConfig(n_values=(2,), seed=7)
        same = cfg.overridden(seed=None, epsilon=None)
        assert same == cfg
        changed = cfg.overridden(seed=9, trials_per_point=None)
        assert changed.seed == 9 and changed.trials_per_point == cfg.trials_per_point


class TestWilson:
    def test_frozen_values(self):
        low, high = wilson_interval(90, 100)
        assert low == pytest.approx(0.8256, abs=5e-4)
        assert high == pytest.approx(0.9448, abs=5e-4)

    def test_properties(self):
        for s, t in [(0, 10), (10, 10), (5, 10), (450, 500)]:
            low, high = wilson_interval(s, t)
            assert 0.0 <= low <= s / t <= high <= 1.0
        # more trials tighten the interval at the same rate
        l1, h1 = wilson_interval(90, 100)
        l2, h2 = wilson_interval(900, 1000)
        assert h2 - l2 < h1 - l1

    def test_validation(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(11, 10)

    def test_estimate_wrapper(self):
        est = SuccessEstimate(45, 50)
        assert est.rate == 0.9
        assert (est.ci_low, est.ci_high) == wilson_interval(45, 50)
        assert "0.9000" in repr(est)


class TestEstimateSuccess:
    def test_generous_budget_always_recovers(self):
        cfg = ExperimentConfig(n_values=(2,), protocol="adaptive-llr", trials_per_point=60, seed=1)
        est = estimate_success(cfg, 2, 2000)
        assert est.rate == 1.0

    def test_single_shot_is_near_chance(self):
        cfg = ExperimentConfig(
            n_values=(2,), protocol="nonadaptive-uniform", trials_per_point=3000, seed=0
        )
        est = estimate_success(cfg, 2, 1)
        assert abs(est.rate - 1.0 / 9.0) < 0.05

    def test_deterministic(self):
        cfg = ExperimentConfig(n_values=(2,), protocol="adaptive-argmax", trials_per_point=40, seed=3)
        a = estimate_success(cfg, 2, 50)
        b = estimate_success(cfg, 2, 50)
        assert a.successes == b.successes

    def test_seed_matters(self):
        base = dict(n_values=(2,), protocol="adaptive-llr", trials_per_point=200)
        a = estimate_success(ExperimentConfig(seed=1, **base), 2, 30)
        b = estimate_success(ExperimentConfig(seed=2, **base), 2, 30)
        assert a.successes != b.successes  # mid-transition budget, distinct streams

    def test_fixed_hidden(self):
        cfg = ExperimentConfig(
            n_values=(2,), protocol="adaptive-llr", trials_per_point=30, seed=0, fixed_hidden="ZY"
        )
        est = estimate_success(cfg, 2, 1500)
        assert est.rate == 1.0
        with pytest.raises(ValueError, match="length"):
            estimate_success(cfg, 3, 10)

    def test_knob_validation(self):
        cfg = ExperimentConfig(n_values=(2,), trials_per_point=5)
        with pytest.raises(ValueError):
            estimate_success(cfg, 2, 0)


class TestBudgetAccounting:
    def test_equal_stage_vector(self):
        cfg = ExperimentConfig(n_values=(4,))
        prof = corollary_profile(4, 0.5)
        assert _stage_vector(cfg, prof, 7) == (7, 7, 7, 7)
        assert total_budget(cfg, 4, 7) == 3 * 28

    def test_theorem_shaped_stage_vector(self):
        cfg = ExperimentConfig(n_values=(4,), theorem_allocation=True)
        prof = corollary_profile(4, 0.5)  # betas 1/24, alpha 1/8: weights 576,576,576,64
        vec = _stage_vector(cfg, prof, 448)
        assert vec == (576, 576, 576, 64)
        assert sum(vec) == 4 * 448
        assert total_budget(cfg, 4, 448) == 3 * 4 * 448

    def test_nonadaptive_knob_is_total(self):
        cfg = ExperimentConfig(n_values=(3,), protocol="nonadaptive-uniform")
        assert total_budget(cfg, 3, 123) == 123


class TestMinimalBudget:
    def test_finds_smallest_tested_passing(self):
        cfg = ExperimentConfig(
            n_values=(2,), protocol="adaptive-llr", trials_per_point=150,
            success_threshold=0.9, seed=0,
        )
        res = minimal_budget(cfg, 2)
        assert res.found
        bar = cfg.success_threshold - 0.02
        assert res.estimate.ci_low >= bar
        assert res.budget == total_budget(cfg, 2, res.knob)
        # every cheaper knob the search tried fell short
        for ev in res.evaluations:
            if ev.knob < res.knob:
                assert ev.estimate.ci_low < bar
        # bracket honored: the next knob down was either tested-failing or
        # within the 5% relative stopping width
        assert res.knob >= 1

    def test_warm_start_walks_down(self):
        cfg = ExperimentConfig(
            n_values=(2,), protocol="adaptive-llr", trials_per_point=150,
            success_threshold=0.9, seed=0,
        )
        cold = minimal_budget(cfg, 2)
        warm = minimal_budget(cfg, 2, initial_knob=cold.knob * 8)
        assert warm.found
        assert warm.knob <= cold.knob * 8
        # same evaluation cache semantics, same bar: answers land close
        assert abs(warm.knob - cold.knob) <= max(1, 0.15 * cold.knob)

    def test_pass_at_knob_one(self):
        cfg = ExperimentConfig(
            n_values=(1,), protocol="adaptive-llr", epsilon=0.9,
            trials_per_point=200, success_threshold=0.5, seed=4,
        )
        res = minimal_budget(cfg, 1, initial_knob=64)
        assert res.found

    def test_unreachable_threshold_records_failure(self):
        cfg = ExperimentConfig(
            n_values=(2,), protocol="adaptive-llr", trials_per_point=50,
            success_threshold=0.99, budget_ceiling=2000, seed=2,
        )
        res = minimal_budget(cfg, 2)
        assert not res.found
        assert res.knob is None and res.budget is None and res.estimate is None
        assert res.ceiling == 2000
        assert len(res.evaluations) > 0
        assert all(ev.budget <= 2000 for ev in res.evaluations)


class TestSweepAndFits:
    def test_sweep_collects_points(self):
        cfg = ExperimentConfig(
            n_values=(3, 2), protocol="adaptive-llr", trials_per_point=120,
            success_threshold=0.85, seed=0,
        )
        curve = run_sweep(cfg)
        assert [p.n for p in curve.points] == [2, 3]
        assert not curve.failures
        assert curve.points[0].budget <= curve.points[1].budget

    def test_sweep_records_failures(self):
        cfg = ExperimentConfig(
            n_values=(2,), protocol="adaptive-llr", trials_per_point=50,
            success_threshold=0.99, budget_ceiling=1000, seed=2,
        )
        curve = run_sweep(cfg)
        assert not curve.points
        assert len(curve.failures) == 1 and curve.failures[0].n == 2

    def _synthetic_curve(self, protocol, budgets, ns, trials=500):
        return BudgetCurve(
            protocol, 0.5, 0.1, 0,
            points=[CurvePoint(n, b, 0.9, 0.88, 0.92, trials) for n, b in zip(ns, budgets)],
        )

    def test_exponential_fit_recovers_exact_law(self):
        ns = [2, 3, 4, 5]
        curve = self._synthetic_curve("nonadaptive-uniform", [7 * 3**n for n in ns], ns)
        fitted = fit_curves(curve)
        assert isinstance(fitted.fit, ExponentialFit)
        assert fitted.fit.base == pytest.approx(3.0, abs=1e-6)
        assert fitted.fit.amplitude == pytest.approx(7.0, rel=1e-6)
        assert fitted.fit.r_squared == pytest.approx(1.0, abs=1e-9)
        assert fitted.fit.value(6) == pytest.approx(7 * 3**6, rel=1e-6)

    def test_cubic_fit_recovers_exact_law(self):
        ns = [2, 3, 4, 5, 6]
        curve = self._synthetic_curve(
            "adaptive-llr", [2 * n**3 + 3 * n**2 + 4 * n + 7 for n in ns], ns
        )
        fitted = fit_curves(curve)
        assert isinstance(fitted.fit, CubicFit)
        np.testing.assert_allclose(fitted.fit.coefficients, (2.0, 3.0, 4.0, 7.0), atol=1e-6)
        assert fitted.fit.r_squared == pytest.approx(1.0, abs=1e-9)

    def test_low_trial_points_excluded(self):
        ns = [2, 3, 4, 5]
        budgets = [7 * 3**n for n in ns]
        clean = fit_curves(self._synthetic_curve("nonadaptive-uniform", budgets, ns))
        noisy_curve = self._synthetic_curve("nonadaptive-uniform", budgets, ns)
        noisy_curve.points.append(CurvePoint(6, 999999999, 0.9, 0.88, 0.92, 50))
        noisy = fit_curves(noisy_curve)
        assert noisy.fit == clean.fit

    def test_fit_errors(self):
        with pytest.raises(ValueError, match=">= 4 points"):
            fit_curves(self._synthetic_curve("adaptive-llr", [10, 20, 30], [2, 3, 4]))
        with pytest.raises(ValueError, match=">= 3 points"):
            fit_curves(self._synthetic_curve("nonadaptive-uniform", [10, 20], [2, 3]))
        with pytest.raises(ValueError, match="positive"):
            fit_curves(self._synthetic_curve("nonadaptive-uniform", [10, 0, 30], [2, 3, 4]))
        with pytest.raises(ValueError, match="unknown fit kind"):
            fit_curves(self._synthetic_curve("adaptive-llr", [1, 2, 3, 4], [2, 3, 4, 5]), kind="quartic")

    def test_kind_override(self):
        ns = [2, 3, 4, 5]
        curve = self._synthetic_curve("adaptive-llr", [7 * 3**n for n in ns], ns)
        fitted = fit_curves(curve, kind="exponential")
        assert isinstance(fitted.fit, ExponentialFit)


class TestVerifyAll:
    def test_all_checks_pass(self):
        report = verify_all(max_n=3, seed=0)
        assert report.passed, [c.name for c in report.failures()]
        assert len(report.checks) == 16
        lines = report.format_lines()
        assert lines[-1] == "OK: 16/16 checks passed"
        assert all(line.startswith("PASS") for line in lines[:-1])

    def test_to_dict(self):
        report = verify_all(max_n=2, seed=1)
        d = report.to_dict()
        assert d["max_n"] == 2 and d["passed"] is True
        assert {c["name"] for c in d["checks"]} >= {"born-closed-form", "backend-equality"}
        json.dumps(d)  # serializable

    def test_max_n_validation(self):
        with pytest.raises(ValueError):
            verify_all(max_n=0)
        with pytest.raises(ValueError):
            verify_all(max_n=99)


class TestEmitOutputs:
    def _curves(self):
        ns = [2, 3, 4, 5]
        ad = BudgetCurve(
            "adaptive-llr", 0.5, 0.1, 0,
            points=[CurvePoint(n, 100 * n**3, 0.91, 0.89, 0.93, 500) for n in ns],
        )
        na = BudgetCurve(
            "nonadaptive-uniform", 0.5, 0.1, 0,
            points=[CurvePoint(n, 9 * 3**n, 0.90, 0.88, 0.92, 500) for n in ns],
        )
        return [fit_curves(ad), fit_curves(na)]

    def test_writes_all_outputs(self, tmp_path):
        out = tmp_path / "results"
        written = emit_outputs(self._curves(), str(out))
        names = sorted(p.rsplit("/", 1)[1] for p in written)
        assert names == [
            "fig_adaptive.svg", "fig_comparison.svg", "fig_nonadaptive.svg", "sweep.csv",
        ]
        csv_lines = (out / "sweep.csv").read_text().splitlines()
        assert csv_lines[0] == CSV_HEADER
        assert len(csv_lines) == 1 + 8
        first = csv_lines[1].split(",")
        assert first[0] == "adaptive-llr" and first[1] == "2" and first[4] == "800"
        for name in names:
            if name.endswith(".svg"):
                assert (out / name).read_text().startswith("<svg")

    def test_byte_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        emit_outputs(self._curves(), str(a))
        emit_outputs(self._curves(), str(b))
        for name in ("sweep.csv", "fig_adaptive.svg", "fig_nonadaptive.svg", "fig_comparison.svg"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_empty_input_yields_header_only(self, tmp_path):
        written = emit_outputs([], str(tmp_path / "empty"))
        assert len(written) == 1 and written[0].endswith("sweep.csv")
        assert (tmp_path / "empty" / "sweep.csv").read_text() == CSV_HEADER + "\n"

    def test_io_error_carries_path(self, tmp_path):
        blocker = tmp_path / "not_a_dir"
        blocker.write_text("occupied")
        with pytest.raises(OSError, match="not_a_dir"):
            emit_outputs([], str(blocker))
