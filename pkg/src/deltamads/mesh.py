"""Mesh state, poll directions, opportunistic and extended polling.

Continuous coordinates live on a normalized [0, 1] lattice spaced delta_m and
anchored at the initial point; integer variables move by a per-variable step
that scales with the poll size.  Directions are 2n orthogonal +/- pairs built
from a seeded Householder transform, rounded to integer mesh units.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .space import (
    Evaluation,
    Point,
    SearchSpace,
    canonical_key,
    denormalize_reals,
    normalize_reals,
    project_bounds,
)


class BudgetExhausted(Exception):
    """Raised by an evaluator when no blackbox calls remain."""


@dataclass(frozen=True)
class Mesh:
    delta_p: float
    delta_m: float
    integer_steps: tuple[int, ...]  # aligned with space.integer_indices
    anchor: Point

    def __post_init__(self):
        if not 0 < self.delta_m <= self.delta_p <= 1:
            raise ValueError("need 0 < delta_m <= delta_p <= 1")
        if any(s < 1 for s in self.integer_steps):
            raise ValueError("integer steps must be >= 1")


def _integer_steps(space: SearchSpace, delta_p: float) -> tuple[int, ...]:
    steps = []
    for i in space.integer_indices:
        v = space.variables[i]
        steps.append(max(1, round(delta_p * (v.upper - v.lower))))
    return tuple(steps)


def initial_mesh(space: SearchSpace, anchor: Point, delta_p: float = 0.5) -> Mesh:
    delta_p = min(max(delta_p, 1e-12), 1.0)
    return Mesh(
        delta_p=delta_p,
        delta_m=min(delta_p, delta_p * delta_p),
        integer_steps=_integer_steps(space, delta_p),
        anchor=anchor,
    )


def update_mesh(mesh: Mesh, success: bool, space: SearchSpace) -> Mesh:
    """Coarsen on success (capped at 1), refine on failure."""
    delta_p = min(2 * mesh.delta_p, 1.0) if success else mesh.delta_p / 2
    return replace(
        mesh,
        delta_p=delta_p,
        delta_m=min(delta_p, delta_p * delta_p),
        integer_steps=_integer_steps(space, delta_p),
    )


def generate_directions(
    n_cont: int, seed: int, delta_m: float, delta_p: float
) -> list[np.ndarray]:
    """2*n_cont integer direction vectors (mesh units) forming +/- pairs.

    Columns of a Householder reflection of a seeded random unit vector are
    scaled so the largest coordinate is delta_p/delta_m mesh steps, then
    rounded.  The result positively spans R^n_cont; if rounding ever breaks
    linear independence the scaled identity basis is used instead.
    """
    if n_cont == 0:
        return []
    ratio = max(1, round(delta_p / delta_m))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n_cont)
    v /= np.linalg.norm(v)
    house = np.eye(n_cont) - 2.0 * np.outer(v, v)
    basis = []
    for j in range(n_cont):
        col = house[:, j]
        d = np.rint(col * (ratio / np.max(np.abs(col)))).astype(int)
        basis.append(d)
    if np.linalg.matrix_rank(np.array(basis)) < n_cont:
        basis = [ratio * e for e in np.eye(n_cont, dtype=int)]
    return basis + [-d for d in basis]


def project_to_mesh(u: float, anchor_u: float, delta_m: float) -> float:
    """Nearest lattice point anchor_u + k*delta_m inside [0, 1]."""
    k = round((u - anchor_u) / delta_m)
    k_min = math.ceil((0.0 - anchor_u) / delta_m - 1e-12)
    k_max = math.floor((1.0 - anchor_u) / delta_m + 1e-12)
    k = min(max(k, k_min), k_max)
    return min(max(anchor_u + k * delta_m, 0.0), 1.0)


def mesh_project_point(point: Point, mesh: Mesh, space: SearchSpace) -> Point:
    """Clamp to bounds and snap continuous coordinates onto the mesh."""
    point = project_bounds(point, space)
    coords = normalize_reals(point, space)
    anchor = normalize_reals(mesh.anchor, space)
    snapped = [project_to_mesh(u, a, mesh.delta_m) for u, a in zip(coords, anchor)]
    reals = denormalize_reals(snapped, space)
    vals = list(point.values)
    for i, x in zip(space.real_indices, reals):
        vals[i] = x
    return project_bounds(Point(tuple(vals)), space)


@dataclass(frozen=True)
class PollCandidate:
    point: Point
    tag: str  # generating move, e.g. "dir+3" or "int[batch]-1"


def poll_candidates(
    incumbent: Point, mesh: Mesh, space: SearchSpace, seed: int
) -> list[PollCandidate]:
    """Continuous mesh steps around the incumbent, then integer +/- moves.

    Candidates are bound-projected, mesh-snapped, and deduplicated by
    canonical key (the incumbent itself is dropped).
    """
    cands: list[PollCandidate] = []
    seen = {canonical_key(incumbent, space)}

    def push(point: Point, tag: str) -> None:
        key = canonical_key(point, space)
        if key not in seen:
            seen.add(key)
            cands.append(PollCandidate(point, tag))

    n_cont = space.n_real
    if n_cont:
        base = np.array(normalize_reals(incumbent, space))
        for j, d in enumerate(generate_directions(n_cont, seed, mesh.delta_m, mesh.delta_p)):
            coords = base + mesh.delta_m * d
            vals = list(incumbent.values)
            for i, u in zip(space.real_indices, denormalize_reals(coords, space)):
                vals[i] = u
            point = mesh_project_point(Point(tuple(vals)), mesh, space)
            push(point, f"dir{j}")
    for j, i in enumerate(space.integer_indices):
        v = space.variables[i]
        for sign in (+1, -1):
            x = int(min(max(incumbent.values[i] + sign * mesh.integer_steps[j], v.lower), v.upper))
            if x == incumbent.values[i]:
                continue
            vals = list(incumbent.values)
            vals[i] = x
            point = mesh_project_point(Point(tuple(vals)), mesh, space)
            push(point, f"int[{v.name}]{'+' if sign > 0 else '-'}")
    return cands


@dataclass
class PollOutcome:
    best: Evaluation | None  # best successful evaluation seen, if any
    success: bool            # strict improvement over the incumbent value
    exhausted: bool          # budget ran out mid-poll
    n_evaluated: int = 0


def _better(a: Evaluation | None, b: Evaluation | None) -> Evaluation | None:
    # earlier evaluation wins ties
    if a is None or not a.ok:
        return b if (b is not None and b.ok) else None
    if b is None or not b.ok:
        return a
    if b.objective < a.objective:
        return b
    return a


def opportunistic_poll(
    candidates: list[PollCandidate],
    evaluate,
    incumbent_value: float,
    parallel: int = 1,
) -> PollOutcome:
    """Evaluate candidates in order, stopping at the first strict improvement.

    With parallel > 1, candidates go out in batches; no batch starts after
    one containing an improvement completes.  `evaluate` maps a Point to an
    Evaluation and raises BudgetExhausted when no calls remain.
    """
    out = PollOutcome(best=None, success=False, exhausted=False)
    if parallel <= 1:
        for cand in candidates:
            try:
                ev = evaluate(cand.point)
            except BudgetExhausted:
                out.exhausted = True
                return out
            out.n_evaluated += 1
            out.best = _better(out.best, ev)
            if ev.ok and ev.objective < incumbent_value:
                out.success = True
                return out
        return out
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        for lo in range(0, len(candidates), parallel):
            batch = candidates[lo:lo + parallel]
            futures = [pool.submit(evaluate, c.point) for c in batch]
            for fut in futures:
                try:
                    ev = fut.result()
                except BudgetExhausted:
                    out.exhausted = True
                    continue
                out.n_evaluated += 1
                out.best = _better(out.best, ev)
                if ev.ok and ev.objective < incumbent_value:
                    out.success = True
            if out.success or out.exhausted:
                return out
    return out


def extended_poll(
    incumbent: Evaluation,
    space: SearchSpace,
    mesh: Mesh,
    trigger: float,
    evaluate,
    seed: int,
    parallel: int = 1,
) -> PollOutcome:
    """Visit categorical neighbors of the incumbent; descend from close ones.

    Each neighbor whose value lands within trigger*|f| of the incumbent gets
    one continuous poll round.  Stops early on any strict improvement.
    """
    out = PollOutcome(best=None, success=False, exhausted=False)
    if not space.categorical_indices:
        return out
    f_inc = incumbent.objective
    for ci in space.categorical_indices:
        v = space.variables[ci]
        label = incumbent.point.values[ci]
        for nbr in sorted(v.neighbors[label]):
            vals = list(incumbent.point.values)
            vals[ci] = nbr
            try:
                ev = evaluate(Point(tuple(vals)))
            except BudgetExhausted:
                out.exhausted = True
                return out
            out.n_evaluated += 1
            out.best = _better(out.best, ev)
            if ev.ok and ev.objective < f_inc:
                out.success = True
                return out
            if ev.ok and ev.objective <= f_inc + trigger * abs(f_inc):
                cands = poll_candidates(ev.point, mesh, space, seed + 1 + ci)
                sub = opportunistic_poll(cands, evaluate, f_inc, parallel)
                out.n_evaluated += sub.n_evaluated
                out.best = _better(out.best, sub.best)
                if sub.success:
                    out.success = True
                    return out
                if sub.exhausted:
                    out.exhausted = True
                    return out
    return out
