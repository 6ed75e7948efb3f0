"""Multi-seed benchmark harness: (problem, algo, seed) cells with
best-so-far checkpoints and per-cell summary statistics."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace

from .driver import DriverConfig, RunResult, run_algorithm
from .problems import BenchmarkProblem

RESULTS_COLUMNS = ["problem", "algo", "seed", "checkpoint", "best"]
SUMMARY_COLUMNS = ["problem", "algo", "mean", "median", "std"]


def checkpoints(budget: int) -> list[int]:
    points = [c for c in range(10, budget + 1, 10)]
    if not points or points[-1] != budget:
        points.append(budget)
    return points


def best_so_far(result: RunResult) -> list[float]:
    series = []
    best = float("inf")
    for rec in result.history:
        if rec.objective is not None:
            best = min(best, rec.objective)
        series.append(best)
    return series


@dataclass
class BenchCell:
    problem: str
    algo: str
    seed: int
    series: list[float]   # best-so-far per evaluation

    def at(self, checkpoint: int) -> float:
        idx = min(checkpoint, len(self.series)) - 1
        return self.series[idx]


def run_benchmark(
    problems: list[BenchmarkProblem],
    algos: list[str],
    budget: int,
    n_seeds: int,
    config: DriverConfig | None = None,
    x0: str = "good",
) -> list[BenchCell]:
    base = config or DriverConfig(budget=budget)
    cells = []
    for prob in problems:
        start = prob.x0_good if x0 == "good" else prob.x0_bad
        for algo in algos:
            for seed in range(n_seeds):
                cfg = replace(base, budget=budget, seed=seed)
                result = run_algorithm(algo, prob.space, prob.objective, start, cfg)
                cells.append(BenchCell(prob.name, algo, seed, best_so_far(result)))
    return cells


def results_csv(cells: list[BenchCell], budget: int) -> str:
    lines = [",".join(RESULTS_COLUMNS)]
    for cp in checkpoints(budget):
        for cell in cells:
            lines.append(f"{cell.problem},{cell.algo},{cell.seed},{cp},{cell.at(cp)!r}")
    return "\n".join(lines) + "\n"


def summary_csv(cells: list[BenchCell]) -> str:
    groups: dict[tuple[str, str], list[float]] = {}
    order: list[tuple[str, str]] = []
    for cell in cells:
        key = (cell.problem, cell.algo)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(cell.series[-1])
    lines = [",".join(SUMMARY_COLUMNS)]
    for key in order:
        finals = groups[key]
        mean = statistics.fmean(finals)
        median = statistics.median(finals)
        std = statistics.stdev(finals) if len(finals) > 1 else 0.0
        lines.append(f"{key[0]},{key[1]},{mean!r},{median!r},{std!r}")
    return "\n".join(lines) + "\n"
