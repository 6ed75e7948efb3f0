"""The hybrid optimization loop.

Alternates a target-driven surrogate search over the continuous subspace
with a mesh poll over the full mixed space, adjusting the target by epsilon
each iteration and refining or coarsening the mesh on poll failure/success.
Also hosts the reduced modes (poll-only, search-only, random sampling) used
by the benchmark harness.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace

import numpy as np

from .mesh import (
    BudgetExhausted,
    Mesh,
    extended_poll,
    initial_mesh,
    opportunistic_poll,
    poll_candidates,
    update_mesh,
)
from .space import (
    Cache,
    Evaluation,
    Point,
    SearchSpace,
    Step,
    Kind,
    canonical_key,
    normalize_reals,
    split,
    validate_point,
)
from .surrogate import NoCandidate, SearchModel, fit_interpolant, search_minimize
from .triangulation import NotEnoughPoints, triangulate

# per-dimension ceiling on surrogate nodes; simplex counts explode with both
# node count and dimension, and the mesh poll does the fine-grained work
_NODE_CAP = {1: 64, 2: 48, 3: 40, 4: 30, 5: 24, 6: 20, 7: 16, 8: 14}


class InitialPointFailed(Exception):
    """The starting point's evaluation failed; the run cannot begin."""


class EvaluationFailed(Exception):
    """Raised by a blackbox callable to signal a failed evaluation."""


@dataclass
class DriverConfig:
    budget: int = 100
    y0: float | None = None            # default: f(x0) - 10*epsilon
    epsilon: float = 0.05
    search_budget_per_iter: int = 2
    initial_delta_p: float = 0.5
    min_delta_p: float = 1e-6
    seed: int = 0
    parallelism: int = 1
    xi: float = 0.05                   # extended-poll relative trigger
    max_surrogate_nodes: int = 40
    search_mode: str = "adaptive"      # or "constant"
    k_const: float = 1.0
    poll_enabled: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie strictly in (0, 1)")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.min_delta_p <= 0:
            raise ValueError("min_delta_p must be positive")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass
class HistoryRecord:
    ordinal: int
    step: str
    point: dict
    objective: float | None
    failure: str | None
    y: float | None
    delta_p: float | None

    def to_json(self) -> str:
        return json.dumps({
            "ordinal": self.ordinal,
            "step": self.step,
            "point": self.point,
            "objective": self.objective,
            "failure": self.failure,
            "y": self.y,
            "delta_p": self.delta_p,
        })


@dataclass
class IterationRecord:
    k: int
    delta_p: float        # poll size during the iteration
    y: float              # target during the iteration
    success: bool         # drove the mesh update
    improved: bool        # incumbent got strictly better this iteration
    evaluations: int      # blackbox calls issued this iteration


@dataclass
class RunResult:
    incumbent: Evaluation
    history: list[HistoryRecord]
    iterations: list[IterationRecord]
    evaluations_used: int

    def best_value(self) -> float:
        return self.incumbent.objective

    def history_jsonl(self) -> str:
        return "".join(rec.to_json() + "\n" for rec in self.history)


class _Evaluator:
    """Cache-aware, budget-counting wrapper around the blackbox callable."""

    def __init__(self, space: SearchSpace, blackbox, budget: int):
        self.space = space
        self.blackbox = blackbox
        self.budget = budget
        self.cache = Cache(space)
        self.used = 0
        self.history: list[HistoryRecord] = []
        self.y: float | None = None
        self.delta_p: float | None = None
        self._lock = threading.Lock()

    def __call__(self, point: Point, step: Step) -> Evaluation:
        cached = self.cache.get(point)
        if cached is not None:
            return cached
        with self._lock:
            if self.used >= self.budget:
                raise BudgetExhausted
            self.used += 1
            ordinal = self.used
        objective = failure = None
        try:
            objective = float(self.blackbox(point))
        except EvaluationFailed as exc:
            failure = str(exc) or "evaluation failed"
        ev = Evaluation(point, objective, failure, step, ordinal)
        rec = HistoryRecord(
            ordinal=ordinal,
            step=step.value,
            point=point.as_dict(self.space),
            objective=objective,
            failure=failure,
            y=self.y,
            delta_p=self.delta_p,
        )
        with self._lock:
            self.cache.put(ev)
            self.history.append(rec)
        return ev

    def sorted_history(self) -> list[HistoryRecord]:
        return sorted(self.history, key=lambda r: r.ordinal)


def _discrete_key(point: Point, space: SearchSpace) -> tuple:
    x_n, _ = split(point, space)
    return x_n


def _random_point(space: SearchSpace, rng: np.random.Generator) -> Point:
    vals = []
    for v in space.variables:
        if v.kind is Kind.REAL:
            vals.append(v.lower + rng.random() * v.span)
        elif v.kind is Kind.INTEGER:
            vals.append(int(rng.integers(int(v.lower), int(v.upper) + 1)))
        else:
            vals.append(v.categories[rng.integers(len(v.categories))])
    return Point(tuple(vals))


def optimize(
    space: SearchSpace, blackbox, x0: Point, config: DriverConfig
) -> RunResult:
    """Run the full hybrid loop (or a reduced mode) from x0."""
    validate_point(x0, space)
    ev = _Evaluator(space, blackbox, config.budget)
    mesh = initial_mesh(space, x0, config.initial_delta_p)
    ev.delta_p = mesh.delta_p
    incumbent = ev(x0, Step.INITIAL)
    if not incumbent.ok:
        raise InitialPointFailed(incumbent.failure)
    y = config.y0 if config.y0 is not None else incumbent.objective - 10 * config.epsilon
    iterations: list[IterationRecord] = []
    surrogate_memo: dict[tuple, tuple] = {}
    boot_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xB007]))
    k = 0
    exhausted = False
    while not exhausted and ev.used < config.budget and mesh.delta_p >= config.min_delta_p:
        ev.y, ev.delta_p = y, mesh.delta_p
        used_before = ev.used
        search_improved = False
        poll_success = False
        improved = False

        # --- search step: surrogate over the continuous subspace ------------
        for t in range(config.search_budget_per_iter):
            x_n = _discrete_key(incumbent.point, space)
            nodes = [
                e for e in ev.cache.successes()
                if _discrete_key(e.point, space) == x_n
            ]
            candidate = None
            if space.n_real and len(nodes) >= space.n_real + 2:
                nodes.sort(key=lambda e: (e.objective, e.ordinal))
                cap = min(config.max_surrogate_nodes, _NODE_CAP[min(space.n_real, 8)])
                nodes = nodes[:cap]
                memo_key = (x_n, tuple(sorted(e.ordinal for e in nodes)))
                try:
                    if memo_key in surrogate_memo:
                        tri, interp = surrogate_memo[memo_key]
                    else:
                        pts = np.array([normalize_reals(e.point, space) for e in nodes])
                        vals = np.array([e.objective for e in nodes])
                        tri = triangulate(pts)
                        interp = fit_interpolant(pts, vals)
                        surrogate_memo.clear()  # node sets rarely recur
                        surrogate_memo[memo_key] = (tri, interp)
                    model = SearchModel(
                        tri, interp, y, config.search_mode, config.k_const
                    )
                    candidate = search_minimize(
                        model, mesh, space, x_n,
                        seed=config.seed * 2654435761 % 2**31 + 8191 * k + t,
                        is_cached=lambda p: p in ev.cache,
                    )
                except (NotEnoughPoints, NoCandidate):
                    candidate = None
            if candidate is None and not config.poll_enabled:
                # search-only mode: bootstrap/escape with a seeded random draw
                for _ in range(64):
                    draw = _random_point(space, boot_rng)
                    if draw not in ev.cache:
                        candidate = draw
                        break
            if candidate is None:
                break
            try:
                res = ev(candidate, Step.SEARCH)
            except BudgetExhausted:
                exhausted = True
                break
            if res.ok and res.objective < incumbent.objective:
                incumbent = res
                search_improved = improved = True
                break

        # --- poll step: mesh poll + extended poll over categoricals ---------
        if config.poll_enabled and not exhausted:
            cands = poll_candidates(
                incumbent.point, mesh, space,
                seed=config.seed * 1_000_003 + k,
            )
            out = opportunistic_poll(
                cands, lambda p: ev(p, Step.POLL),
                incumbent.objective, config.parallelism,
            )
            if out.best is not None and out.best.objective < incumbent.objective:
                incumbent = out.best
                improved = True
            poll_success = out.success
            exhausted = out.exhausted
            if not poll_success and not exhausted and space.categorical_indices:
                ext = extended_poll(
                    incumbent, space, mesh, config.xi,
                    lambda p: ev(p, Step.EXTENDED_POLL),
                    seed=config.seed * 7_368_787 + 31 * k,
                    parallel=config.parallelism,
                )
                if ext.best is not None and ext.best.objective < incumbent.objective:
                    incumbent = ext.best
                    improved = True
                poll_success = poll_success or ext.success
                exhausted = exhausted or ext.exhausted
            # a search-step improvement is a mesh success too: the candidate
            # was mesh-projected, so standard step-size coarsening applies
            mesh_success = poll_success or search_improved
        else:
            mesh_success = search_improved

        iterations.append(IterationRecord(
            k=k,
            delta_p=ev.delta_p,
            y=y,
            success=mesh_success,
            improved=improved,
            evaluations=ev.used - used_before,
        ))
        mesh = update_mesh(mesh, mesh_success, space)
        y = y - config.epsilon if incumbent.objective < y else y + config.epsilon
        k += 1

    return RunResult(incumbent, ev.sorted_history(), iterations, ev.used)


def run_random(
    space: SearchSpace, blackbox, x0: Point, config: DriverConfig
) -> RunResult:
    """Seeded uniform random search with the same budget accounting."""
    validate_point(x0, space)
    ev = _Evaluator(space, blackbox, config.budget)
    incumbent = ev(x0, Step.INITIAL)
    if not incumbent.ok:
        raise InitialPointFailed(incumbent.failure)
    rng = np.random.default_rng(config.seed)
    attempts = 0
    while ev.used < config.budget and attempts < 1000 * config.budget:
        point = _random_point(space, rng)
        attempts += 1
        if point in ev.cache:
            continue
        try:
            res = ev(point, Step.BENCHMARK)
        except BudgetExhausted:
            break
        if res.ok and (not incumbent.ok or res.objective < incumbent.objective):
            incumbent = res
    return RunResult(incumbent, ev.sorted_history(), [], ev.used)


ALGORITHMS = ("delta-mads", "mads", "dogs", "random")


def run_algorithm(
    algo: str, space: SearchSpace, blackbox, x0: Point, config: DriverConfig
) -> RunResult:
    if algo == "delta-mads":
        return optimize(space, blackbox, x0, config)
    if algo == "mads":
        return optimize(space, blackbox, x0, replace(config, search_budget_per_iter=0))
    if algo == "dogs":
        cfg = replace(
            config,
            poll_enabled=False,
            search_budget_per_iter=max(1, config.search_budget_per_iter),
        )
        return optimize(space, blackbox, x0, cfg)
    if algo == "random":
        return run_random(space, blackbox, x0, config)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
