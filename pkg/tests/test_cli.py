"""Tests for the command-line interface."""

import json
import sys
from pathlib import Path

from click.testing import CliRunner

from deltamads.cli import EXIT_CONFIG, EXIT_PROTOCOL, main
from deltamads.problems import get_problem
from deltamads.space import space_to_json

WORKERS = Path(__file__).parent / "workers"
PY = sys.executable


def run_cli(args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


class TestOptimize:
    def test_builtin_run_writes_outputs(self, tmp_path):
        out = tmp_path / "run"
        res = run_cli([
            "optimize", "--blackbox", "builtin:sphere2",
            "--budget", "40", "--seed", "1", "--out", str(out),
        ])
        assert res.exit_code == 0
        history = (out / "history.jsonl").read_text()
        assert len(history.splitlines()) <= 40
        summary = json.loads((out / "summary.json").read_text())
        assert summary["best_value"] <= 5.0
        assert summary["evaluations_used"] == len(history.splitlines())
        assert set(summary["best_point"]) == {"x0", "x1"}

    def test_determinism_byte_identical_history(self, tmp_path):
        args = ["optimize", "--blackbox", "builtin:branin-cat",
                "--budget", "60", "--seed", "5", "--parallel", "1"]
        run_cli(args + ["--out", str(tmp_path / "a")])
        run_cli(args + ["--out", str(tmp_path / "b")])
        a = (tmp_path / "a" / "history.jsonl").read_bytes()
        b = (tmp_path / "b" / "history.jsonl").read_bytes()
        assert a == b

    def test_subprocess_blackbox_with_space_and_x0(self, tmp_path):
        prob = get_problem("sphere2")
        space_file = tmp_path / "space.json"
        space_file.write_text(space_to_json(prob.space))
        x0_file = tmp_path / "x0.json"
        x0_file.write_text(json.dumps({"x0": 2.0, "x1": 1.0}))
        out = tmp_path / "run"
        res = run_cli([
            "optimize",
            "--blackbox", f"{PY} {WORKERS / 'echo_worker.py'}",
            "--space", str(space_file), "--x0", str(x0_file),
            "--budget", "25", "--out", str(out),
        ])
        assert res.exit_code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["best_value"] < 5.0

    def test_missing_space_for_subprocess_is_config_error(self, tmp_path):
        res = run_cli([
            "optimize", "--blackbox", "cat", "--out", str(tmp_path / "x"),
        ])
        assert res.exit_code == EXIT_CONFIG

    def test_unknown_builtin_is_config_error(self, tmp_path):
        res = run_cli([
            "optimize", "--blackbox", "builtin:nope", "--out", str(tmp_path / "x"),
        ])
        assert res.exit_code == EXIT_CONFIG

    def test_protocol_error_exit_code(self, tmp_path):
        prob = get_problem("sphere2")
        space_file = tmp_path / "space.json"
        space_file.write_text(space_to_json(prob.space))
        x0_file = tmp_path / "x0.json"
        x0_file.write_text(json.dumps({"x0": 2.0, "x1": 1.0}))
        res = run_cli([
            "optimize",
            "--blackbox", f"{PY} {WORKERS / 'quirky_worker.py'} bad-id",
            "--space", str(space_file), "--x0", str(x0_file),
            "--budget", "10", "--out", str(tmp_path / "run"),
        ])
        assert res.exit_code == EXIT_PROTOCOL

    def test_dump_triangulation(self, tmp_path):
        out = tmp_path / "run"
        res = run_cli([
            "optimize", "--blackbox", "builtin:sphere2",
            "--budget", "60", "--dump-triangulation", "--out", str(out),
        ])
        assert res.exit_code == 0
        doc = json.loads((out / "triangulation.json").read_text())
        assert "vertices" in doc and "simplices" in doc


class TestBench:
    def test_writes_csvs(self, tmp_path):
        out = tmp_path / "bench"
        res = run_cli([
            "bench", "--problems", "sphere2", "--algos", "mads,random",
            "--budget", "15", "--seeds", "2", "--out", str(out),
        ])
        assert res.exit_code == 0
        results = (out / "results.csv").read_text().splitlines()
        assert results[0] == "problem,algo,seed,checkpoint,best"
        assert len(results) > 1
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == "problem,algo,mean,median,std"
        assert len(summary) == 3

    def test_unknown_algo_is_config_error(self, tmp_path):
        res = run_cli([
            "bench", "--algos", "simplex", "--out", str(tmp_path / "x"),
        ])
        assert res.exit_code == EXIT_CONFIG


class TestReport:
    def _make_runs(self, tmp_path):
        runs = tmp_path / "runs"
        for seed in (0, 1):
            out = runs / f"seed{seed}"
            run_cli([
                "optimize", "--blackbox", "builtin:sphere2",
                "--budget", "20", "--seed", str(seed), "--out", str(out),
            ])
        return runs

    def test_writes_csv_svg_png(self, tmp_path):
        runs = self._make_runs(tmp_path)
        csv_file = tmp_path / "curves.csv"
        svg_file = tmp_path / "curves.svg"
        res = run_cli([
            "report", "--runs", str(runs),
            "--csv", str(csv_file), "--svg", str(svg_file),
        ])
        assert res.exit_code == 0
        header = csv_file.read_text().splitlines()[0]
        assert header == "evaluation_index,seed0,seed1"
        assert svg_file.read_text().startswith("<svg")
        png = tmp_path / "curves.png"
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_empty_runs_dir_is_config_error(self, tmp_path):
        empty = tmp_path / "runs"
        empty.mkdir()
        res = run_cli([
            "report", "--runs", str(empty),
            "--csv", str(tmp_path / "c.csv"), "--svg", str(tmp_path / "c.svg"),
        ])
        assert res.exit_code == EXIT_CONFIG

    def test_malformed_history_is_config_error(self, tmp_path):
        runs = tmp_path / "runs"
        runs.mkdir()
        (runs / "broken.jsonl").write_text("{nope\n")
        res = run_cli([
            "report", "--runs", str(runs),
            "--csv", str(tmp_path / "c.csv"), "--svg", str(tmp_path / "c.svg"),
        ])
        assert res.exit_code == EXIT_CONFIG
