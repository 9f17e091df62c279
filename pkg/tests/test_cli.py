import json

import pytest

from paulitree.cli import main
from paulitree.harness import CSV_HEADER, ExperimentConfig


class TestVerifyCommand:
    def test_passes_with_exit_zero(self, capsys):
        assert main(["verify", "--max-n", "2"]) == 0
        out = capsys.readouterr().out
        assert "OK: 16/16 checks passed" in out
        assert out.startswith("backend:")

    def test_json_output(self, capsys):
        assert main(["verify", "--max-n", "2", "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True
        assert len(report["checks"]) == 16

    def test_bad_max_n_is_config_error(self, capsys):
        assert main(["verify", "--max-n", "99"]) == 2
        assert "configuration error" in capsys.readouterr().err


class TestBoundsCommand:
    def test_frozen_numbers(self, capsys):
        assert main(["bounds", "--n", "2", "--epsilon", "0.5", "--eta", "0.1"]) == 0
        out = capsys.readouterr().out
        assert "per-stage shot budgets: [2452, 2452]" in out
        assert "stagewise total (3 * sum m_k): 14712" in out
        assert "adaptive upper bound: 14707.1746" in out
        assert "881.8816" in out

    def test_bad_epsilon(self, capsys):
        assert main(["bounds", "--n", "2", "--epsilon", "2.0"]) == 2


class TestRunCommand:
    def test_adaptive_budget_is_floored_to_stages(self, capsys):
        code = main([
            "run", "--n", "2", "--budget", "12010", "--protocol", "adaptive-llr",
            "--trials", "80", "--seed", "1",
        ])
        assert code == 0
        out = capsys.readouterr().out
        # 12010 // 6 = 2001 shots per stage, 3*2*2001 = 12006 total
        assert "budget=12006" in out
        assert "rate 1.0000" in out

    def test_budget_below_one_shot_per_candidate(self, capsys):
        assert main(["run", "--n", "4", "--budget", "11", "--trials", "5"]) == 2
        assert "cannot fund" in capsys.readouterr().err

    def test_nonadaptive_uses_budget_directly(self, capsys):
        code = main([
            "run", "--n", "2", "--budget", "1", "--protocol", "nonadaptive-uniform",
            "--trials", "300", "--seed", "0",
        ])
        assert code == 0
        assert "budget=1" in capsys.readouterr().out


class TestSweepCommand:
    def test_writes_outputs(self, tmp_path, capsys):
        out_dir = tmp_path / "results"
        code = main([
            "sweep", "--n-list", "2", "--protocol", "adaptive-llr",
            "--trials", "120", "--threshold", "0.85", "--seed", "0",
            "--out", str(out_dir),
        ])
        assert code == 0
        printed = capsys.readouterr()
        assert "n=2: budget" in printed.out
        assert "fit skipped" in printed.err  # one point cannot support a cubic
        lines = (out_dir / "sweep.csv").read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        assert (out_dir / "fig_adaptive.svg").exists()

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = ExperimentConfig(
            n_values=(2,), protocol="adaptive-llr", trials_per_point=999, success_threshold=0.85
        )
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg.to_dict()))
        out_dir = tmp_path / "swept"
        code = main([
            "sweep", "--config", str(cfg_path), "--trials", "100", "--out", str(out_dir),
        ])
        assert code == 0
        rows = (out_dir / "sweep.csv").read_text().splitlines()
        assert rows[1].split(",")[8] == "100"  # flag beat the file's 999

    def test_missing_n_list(self, tmp_path, capsys):
        assert main(["sweep", "--out", str(tmp_path / "x")]) == 2
        assert "n list is required" in capsys.readouterr().err

    def test_bad_n_list(self, tmp_path, capsys):
        assert main(["sweep", "--n-list", "2,zebra", "--out", str(tmp_path / "x")]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main([
            "sweep", "--config", str(tmp_path / "nope.json"),
            "--n-list", "2", "--out", str(tmp_path / "x"),
        ]) == 2

    def test_malformed_config_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main([
            "sweep", "--config", str(bad), "--n-list", "2", "--out", str(tmp_path / "x"),
        ]) == 2

    def test_io_error_exit_code(self, tmp_path):
        blocker = tmp_path / "file_in_the_way"
        blocker.write_text("x")
        code = main([
            "sweep", "--n-list", "1", "--protocol", "adaptive-llr", "--epsilon", "0.9",
            "--trials", "60", "--threshold", "0.5", "--out", str(blocker),
        ])
        assert code == 3


class TestArgparseSurface:
    def test_unknown_protocol_rejected_by_parser(self):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--n-list", "2", "--protocol", "psychic", "--out", "/tmp/x"])
        assert exc.value.code == 2

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit):
            main([])

    def test_sweep_requires_out(self):
        with pytest.raises(SystemExit):
            main(["sweep", "--n-list", "2"])
