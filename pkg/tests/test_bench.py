"""Tests for the multi-seed benchmark harness."""

import csv
import io

from deltamads.bench import (
    BenchCell,
    checkpoints,
    results_csv,
    run_benchmark,
    summary_csv,
)
from deltamads.problems import get_problem


class TestCheckpoints:
    def test_multiples_of_ten_plus_budget(self):
        assert checkpoints(100) == [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
        assert checkpoints(25) == [10, 20, 25]
        assert checkpoints(7) == [7]


class TestBenchCell:
    def test_at_clamps_to_series_length(self):
        cell = BenchCell("p", "a", 0, [3.0, 2.0, 1.0])
        assert cell.at(2) == 2.0
        assert cell.at(100) == 1.0


class TestRunBenchmark:
    def _cells(self):
        return run_benchmark(
            [get_problem("sphere2")], ["mads", "random"], budget=20, n_seeds=2
        )

    def test_cell_grid_complete(self):
        cells = self._cells()
        assert len(cells) == 4
        keys = {(c.problem, c.algo, c.seed) for c in cells}
        assert ("sphere2", "mads", 0) in keys
        assert ("sphere2", "random", 1) in keys

    def test_series_monotone_non_increasing(self):
        for cell in self._cells():
            assert all(a >= b for a, b in zip(cell.series, cell.series[1:]))

    def test_results_csv_shape(self):
        cells = self._cells()
        rows = list(csv.DictReader(io.StringIO(results_csv(cells, 20))))
        assert len(rows) == len(checkpoints(20)) * len(cells)
        assert set(rows[0]) == {"problem", "algo", "seed", "checkpoint", "best"}
        floats = [float(r["best"]) for r in rows]
        assert all(f >= 0 for f in floats)

    def test_summary_csv_stats(self):
        cells = self._cells()
        rows = list(csv.DictReader(io.StringIO(summary_csv(cells))))
        assert len(rows) == 2  # one per (problem, algo)
        for row in rows:
            assert float(row["std"]) >= 0.0
            assert float(row["mean"]) >= 0.0

    def test_bad_x0_used_when_requested(self):
        good = run_benchmark([get_problem("sphere2")], ["mads"], 5, 1, x0="good")
        bad = run_benchmark([get_problem("sphere2")], ["mads"], 5, 1, x0="bad")
        assert good[0].series[0] != bad[0].series[0]
