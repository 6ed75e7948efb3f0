"""Surrogate search over the continuous subspace.

Combines a polyharmonic-spline interpolant of cached objective values with a
Delaunay uncertainty to score candidate points against the current target
value, returning one mesh-feasible candidate per call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, mesh_project_point
from .space import Point, SearchSpace, denormalize_reals, merge
from .triangulation import (
    NotEnoughPoints,
    Triangulation,
    triangulate,
)

COND_LIMIT = 1e12


class NoCandidate(Exception):
    """The search could not produce an uncached candidate."""


@dataclass
class Interpolant:
    nodes: np.ndarray       # (N, n)
    values: np.ndarray      # (N,)
    weights: np.ndarray     # (N,) spline weights, zero in fallback mode
    tail: np.ndarray        # (n+1,) constant + linear coefficients
    interpolating: bool     # False when the least-squares fallback was used

    def __call__(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, float))
        d = np.linalg.norm(pts[:, None, :] - self.nodes[None, :, :], axis=2)
        vals = (d**3) @ self.weights + self.tail[0] + pts @ self.tail[1:]
        return vals


def fit_interpolant(points, values) -> Interpolant:
    """Cubic polyharmonic spline with a linear tail through (points, values).

    Duplicate points keep their lower value.  A numerically singular saddle
    system (condition estimate above 1e12) falls back to a linear
    least-squares fit flagged as non-interpolating.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    vals = np.asarray(values, float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("interpolation values must be finite")
    # dedupe, keeping the better (lower) value per location
    best: dict[tuple, int] = {}
    for i, p in enumerate(pts):
        key = tuple(np.round(p, 12))
        if key not in best or vals[i] < vals[best[key]]:
            best[key] = i
    keep = sorted(best.values())
    pts, vals = pts[keep], vals[keep]
    n_pts, dim = pts.shape
    if n_pts < dim + 2:
        raise NotEnoughPoints(f"need at least {dim + 2} points, have {n_pts}")
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    kernel = d**3
    poly = np.hstack([np.ones((n_pts, 1)), pts])
    sys = np.block([
        [kernel, poly],
        [poly.T, np.zeros((dim + 1, dim + 1))],
    ])
    rhs = np.concatenate([vals, np.zeros(dim + 1)])
    if np.linalg.cond(sys) > COND_LIMIT:
        tail, *_ = np.linalg.lstsq(poly, vals, rcond=None)
        return Interpolant(pts, vals, np.zeros(n_pts), tail, False)
    sol = np.linalg.solve(sys, rhs)
    return Interpolant(pts, vals, sol[:n_pts], sol[n_pts:], True)


@dataclass
class SearchModel:
    triangulation: Triangulation
    interpolant: Interpolant
    target: float
    mode: str = "adaptive"   # "adaptive": (p - y)/e; "constant": p - K*e
    k_const: float = 1.0


def build_search_model(
    points, values, target: float, mode: str = "adaptive", k_const: float = 1.0
) -> SearchModel:
    tri = triangulate(points)
    interp = fit_interpolant(points, values)
    return SearchModel(tri, interp, target, mode, k_const)


def _scores(model: SearchModel, p: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Lower is better; reaching the target dominates via -inf ranks."""
    if model.mode == "constant":
        return p - model.k_const * e
    s = np.full_like(p, np.inf)
    pos = e > 1e-15
    s[pos] = (p[pos] - model.target) / e[pos]
    s[p <= model.target] = -np.inf
    return s


def _project_into_simplex(tri: Triangulation, idx: int, x: np.ndarray) -> np.ndarray:
    """Clamp x into simplex idx via nonnegative renormalized barycentrics.

    Accepts a single point (n,) or a batch (m, n).
    """
    verts = tri.vertices[tri.simplices[idx]]
    inv = tri._barycentric_solvers()[idx]
    batch = np.atleast_2d(np.asarray(x, float))
    lam = (batch - verts[0]) @ inv.T
    lam = np.hstack([1.0 - lam.sum(axis=1, keepdims=True), lam])
    lam = np.clip(lam, 0.0, None)
    lam /= lam.sum(axis=1, keepdims=True)
    out = lam @ verts
    return out[0] if np.ndim(x) == 1 else out


def search_minimize(
    model: SearchModel,
    mesh: Mesh,
    space: SearchSpace,
    x_n: tuple,
    seed: int,
    is_cached,
    n_samples: int = 20,
    refine_iters: int = 10,
) -> Point:
    """Propose one uncached, mesh-feasible point minimizing the search score.

    Per simplex the score is sampled at the barycenter, the circumcenter when
    it is interior, and `n_samples` seeded Dirichlet-random interior points;
    any sampled point with p(x) <= target wins immediately (ties by lower p).
    The global best is refined by simplex-projected coordinate descent with
    step halving, then denormalized, merged with the frozen discrete part
    x_n, and projected onto mesh and bounds.  If that point is already cached
    the best uncached per-simplex runner-up is returned instead.

    Raises NoCandidate when every produced point is already cached.
    """
    tri = model.triangulation
    n_simp, dim = tri.simplices.shape[0], tri.dim
    rng = np.random.default_rng(seed)
    verts = tri.vertices[tri.simplices]          # (S, n+1, n)

    samples = [verts.mean(axis=1)[:, None, :]]   # barycenters
    lam = rng.dirichlet(np.ones(dim + 1), size=(n_simp, n_samples))
    samples.append(np.einsum("ski,sin->skn", lam, verts))
    pts = np.concatenate(samples, axis=1)        # (S, m, n)

    # circumcenters, kept only where interior to their simplex
    cc = tri.centers
    cc_ok = np.all(tri.barycentric_own(cc) >= 1e-12, axis=1)

    m = pts.shape[1]
    flat = pts.reshape(-1, dim)
    p_flat = model.interpolant(flat)
    e_flat = (
        np.repeat(tri.radii2, m)
        - np.sum((flat - np.repeat(tri.centers, m, axis=0)) ** 2, axis=1)
    )
    e_flat = np.clip(e_flat, 0.0, None)
    s_flat = _scores(model, p_flat, e_flat)
    simp_of = np.repeat(np.arange(n_simp), m)

    if cc_ok.any():
        idx = np.flatnonzero(cc_ok)
        p_cc = model.interpolant(cc[idx])
        e_cc = np.clip(tri.radii2[idx], 0.0, None)  # e at the center is r^2
        s_cc = _scores(model, p_cc, e_cc)
        flat = np.vstack([flat, cc[idx]])
        p_flat = np.concatenate([p_flat, p_cc])
        s_flat = np.concatenate([s_flat, s_cc])
        simp_of = np.concatenate([simp_of, idx])

    order = np.lexsort((p_flat, s_flat))

    def score_batch(xs: np.ndarray, si: int) -> tuple[np.ndarray, np.ndarray]:
        p = model.interpolant(xs)
        e = np.clip(
            tri.radii2[si] - np.sum((xs - tri.centers[si]) ** 2, axis=1), 0.0, None
        )
        return _scores(model, p, e), p

    def refine(x: np.ndarray, si: int) -> np.ndarray:
        x = x.copy()
        s0, p0 = score_batch(x[None, :], si)
        best = (float(s0[0]), float(p0[0]))
        step = 0.25
        for _ in range(refine_iters):
            # all 2*dim coordinate trials of this sweep in one batch
            offs = np.vstack([step * np.eye(dim), -step * np.eye(dim)])
            trials = _project_into_simplex(tri, si, x + offs)
            s, p = score_batch(trials, si)
            i = int(np.lexsort((p, s))[0])
            sc = (float(s[i]), float(p[i]))
            if sc < best:
                best, x = sc, trials[i]
            step /= 2
        return x

    def to_point(coords: np.ndarray) -> Point:
        x_r = denormalize_reals(coords, space)
        return mesh_project_point(merge(x_n, x_r, space), mesh, space)

    # best sample per simplex, ranked; project in order until one is uncached
    best_per_simplex: dict[int, int] = {}
    for i in order:
        best_per_simplex.setdefault(int(simp_of[i]), int(i))
    ranked = sorted(
        best_per_simplex.items(), key=lambda kv: (s_flat[kv[1]], p_flat[kv[1]])
    )
    tried_refine = False
    for si, i in ranked:
        x = flat[i]
        if not tried_refine:
            x = refine(x, si)
            tried_refine = True
        cand = to_point(x)
        if not is_cached(cand):
            return cand
    raise NoCandidate("all search candidates already cached")
