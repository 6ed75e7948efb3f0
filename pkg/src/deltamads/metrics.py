"""Classification metrics and run-history aggregation."""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be nonnegative")


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float


def prf1(counts: ConfusionCounts) -> ClassScores:
    """Precision, recall, and F1 with the zero-denominator convention = 0."""
    p = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    r = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = 2.0 * p * r / (p + r) if p + r else 0.0
    return ClassScores(p, r, f1)


def f1_from_pr(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def mean_f1(scores: list[ClassScores]) -> float:
    """Unweighted mean of per-class F1 scores."""
    if not scores:
        return 0.0
    return sum(s.f1 for s in scores) / len(scores)


class HistoryParseError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def convergence_table(history_jsonl: str) -> list[float]:
    """Best-so-far objective per evaluation; failures carry the last best.

    Leading failures (before any success) carry +inf.
    """
    series: list[float] = []
    best = float("inf")
    for i, line in enumerate(history_jsonl.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise HistoryParseError(i, str(exc)) from exc
        if not isinstance(rec, dict) or "objective" not in rec:
            raise HistoryParseError(i, "record lacks an objective field")
        obj = rec["objective"]
        if obj is not None:
            best = min(best, float(obj))
        series.append(best)
    return series
