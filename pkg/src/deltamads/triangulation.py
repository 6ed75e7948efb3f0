"""Incremental Delaunay triangulation with circumsphere bookkeeping.

Bowyer-Watson insertion inside a large bounding super-simplex; every kept
simplex carries its circumcenter and squared circumradius, which the
surrogate's uncertainty function consumes directly.  Inputs are normalized
points in [0, 1]^n with n <= 8.  Near-degenerate inputs are jittered by at
most 1e-9 and results are reported at the original coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DIM = 8
JITTER = 1e-9
SUPER_SCALE = 40.0


class TriangulationError(Exception):
    pass


class NotEnoughPoints(TriangulationError):
    """Fewer than n+1 affinely independent points."""


class DimensionTooHigh(TriangulationError):
    """More than MAX_DIM continuous dimensions."""


class OutsideHull(TriangulationError):
    """Query point lies outside the convex hull of the vertices."""


class DegenerateSimplex(TriangulationError):
    pass


def circumsphere(vertices: np.ndarray) -> tuple[np.ndarray, float]:
    """Center and radius of the sphere through the n+1 vertices of a simplex."""
    pts = np.asarray(vertices, float)
    a = pts[0]
    mat = 2.0 * (pts[1:] - a)
    rhs = np.sum(pts[1:] ** 2 - a**2, axis=1)
    try:
        center = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplex("singular circumsphere system") from exc
    if not np.all(np.isfinite(center)):
        raise DegenerateSimplex("non-finite circumcenter")
    return center, float(np.linalg.norm(center - a))


def simplex_volume(vertices: np.ndarray) -> float:
    pts = np.asarray(vertices, float)
    det = np.linalg.det(pts[1:] - pts[0])
    return abs(det) / math.factorial(pts.shape[1])


@dataclass
class Triangulation:
    vertices: np.ndarray    # (N, n), original (unjittered) coordinates
    simplices: np.ndarray   # (S, n+1) vertex indices
    centers: np.ndarray     # (S, n) circumcenters
    radii2: np.ndarray      # (S,) squared circumradii
    _inv: np.ndarray | None = None  # (S, n, n) barycentric solvers, lazy

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def _barycentric_solvers(self) -> np.ndarray:
        if self._inv is None:
            v0 = self.vertices[self.simplices[:, 0]]
            edges = (
                self.vertices[self.simplices[:, 1:]] - v0[:, None, :]
            ).transpose(0, 2, 1)
            try:
                self._inv = np.linalg.inv(edges)
            except np.linalg.LinAlgError:
                # sliver simplices: least-squares coordinates are good enough
                self._inv = np.linalg.pinv(edges)
        return self._inv

    def barycentric_own(self, points: np.ndarray) -> np.ndarray:
        """(S, n+1) coordinates of the i-th point within the i-th simplex."""
        inv = self._barycentric_solvers()
        v0 = self.vertices[self.simplices[:, 0]]
        lam = np.einsum("sij,sj->si", inv, np.asarray(points, float) - v0)
        lam0 = 1.0 - lam.sum(axis=1, keepdims=True)
        return np.hstack([lam0, lam])

    def barycentric(self, x: np.ndarray) -> np.ndarray:
        """(S, n+1) barycentric coordinates of x in every simplex."""
        inv = self._barycentric_solvers()
        v0 = self.vertices[self.simplices[:, 0]]
        lam = np.einsum("sij,sj->si", inv, np.asarray(x, float) - v0)
        lam0 = 1.0 - lam.sum(axis=1, keepdims=True)
        return np.hstack([lam0, lam])

    def locate(self, x: np.ndarray, tol: float = 1e-9) -> int:
        """Index of a simplex containing x, or -1 if outside the hull."""
        lam = self.barycentric(x)
        inside = np.all(lam >= -tol, axis=1)
        idx = np.flatnonzero(inside)
        return int(idx[0]) if idx.size else -1


def uncertainty(x, tri: Triangulation) -> float:
    """Delaunay uncertainty r^2 - ||x - z||^2 of the containing simplex.

    Zero at every vertex, positive strictly inside the hull, continuous
    across shared facets (it is the negated power distance).
    """
    x = np.asarray(x, float)
    i = tri.locate(x)
    if i < 0:
        raise OutsideHull(f"{x} outside the triangulated hull")
    val = tri.radii2[i] - float(np.sum((x - tri.centers[i]) ** 2))
    return max(val, 0.0)


def _dedupe(points: np.ndarray) -> np.ndarray:
    seen = set()
    keep = []
    for i, p in enumerate(points):
        key = tuple(np.round(p, 12))
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return points[keep]


def _affine_rank(points: np.ndarray) -> int:
    centered = points - points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    return int(np.sum(sv > 1e-12 * max(1.0, sv[0] if sv.size else 1.0)))


def _batch_circumspheres(verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Circumcenters and squared radii for a (F, n+1, n) stack of simplices."""
    a = verts[:, :1, :]
    mat = 2.0 * (verts[:, 1:, :] - a)
    rhs = np.sum(verts[:, 1:, :] ** 2 - a**2, axis=2)
    centers = np.linalg.solve(mat, rhs[..., None])[..., 0]
    radii2 = np.sum((centers - verts[:, 0, :]) ** 2, axis=1)
    return centers, radii2


def _build(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One Bowyer-Watson pass; returns (simplices, centers, radii2)."""
    n = points.shape[1]
    center = np.full(n, 0.5)
    sup = np.vstack(
        [center + SUPER_SCALE * np.eye(n)[i] for i in range(n)]
        + [center - SUPER_SCALE * np.ones(n)]
    )
    allp = np.vstack([sup, points])
    cap = 256
    simp = np.zeros((cap, n + 1), dtype=np.int64)
    centers = np.zeros((cap, n))
    radii2 = np.zeros(cap)
    alive = np.zeros(cap, dtype=bool)
    simp[0] = np.arange(n + 1)
    z, r = circumsphere(allp[: n + 1])
    centers[0], radii2[0], alive[0] = z, r * r, True
    count = 1
    for ip in range(n + 1, allp.shape[0]):
        p = allp[ip]
        d2 = np.sum((centers[:count] - p) ** 2, axis=1)
        bad = np.flatnonzero((d2 < radii2[:count] * (1 + 1e-12) + 1e-14) & alive[:count])
        if bad.size == 0:
            raise DegenerateSimplex("insertion point outside all circumspheres")
        facet_count: dict[tuple[int, ...], int] = {}
        for bi in bad:
            s = tuple(simp[bi].tolist())
            for j in range(n + 1):
                f = s[:j] + s[j + 1:]
                facet_count[f] = facet_count.get(f, 0) + 1
        alive[bad] = False
        fresh = [
            sorted(f + (ip,)) for f, cnt in facet_count.items() if cnt == 1
        ]
        if not fresh:
            raise DegenerateSimplex("empty insertion cavity boundary")
        verts = allp[np.asarray(fresh)]
        try:
            new_c, new_r2 = _batch_circumspheres(verts)
        except np.linalg.LinAlgError as exc:
            raise DegenerateSimplex("singular circumsphere system") from exc
        if not np.all(np.isfinite(new_c)):
            raise DegenerateSimplex("non-finite circumcenter")
        need = count + len(fresh)
        if need > cap:
            while need > cap:
                cap *= 2
            simp = np.resize(simp, (cap, n + 1))
            centers = np.resize(centers, (cap, n))
            radii2 = np.resize(radii2, cap)
            alive = np.resize(alive, cap)
            alive[count:] = False
        simp[count:need] = fresh
        centers[count:need] = new_c
        radii2[count:need] = new_r2
        alive[count:need] = True
        count = need
    keep = np.flatnonzero(alive[:count] & (simp[:count].min(axis=1) > n))
    if keep.size == 0:
        raise DegenerateSimplex("no interior simplices survived")
    return simp[keep] - (n + 1), centers[keep].copy(), radii2[keep].copy()


def _delaunay_ok(
    points: np.ndarray, simp: np.ndarray, cen: np.ndarray, r2: np.ndarray,
    tol: float = 1e-9,
) -> bool:
    for s, z, rr in zip(simp, cen, r2):
        d2 = np.sum((points - z) ** 2, axis=1)
        inside = d2 < rr - tol * max(1.0, rr)
        inside[s] = False
        if inside.any():
            return False
    return True


def triangulate(points) -> Triangulation:
    """Delaunay triangulation of normalized points via incremental insertion.

    Duplicates are removed first; degenerate inputs get a deterministic
    jitter of at most 1e-9 (results still refer to the original points).
    """
    pts = np.atleast_2d(np.asarray(points, float))
    n = pts.shape[1]
    if n > MAX_DIM:
        raise DimensionTooHigh(f"{n} continuous dimensions exceeds limit {MAX_DIM}")
    if n == 0:
        raise NotEnoughPoints("no continuous dimensions to triangulate")
    pts = _dedupe(pts)
    if pts.shape[0] < n + 1 or _affine_rank(pts) < n:
        raise NotEnoughPoints(
            f"need at least {n + 1} affinely independent points, have {pts.shape[0]}"
        )
    last_exc: Exception | None = None
    # lattice-like inputs (poll points) are exactly degenerate; skip the
    # doomed unjittered attempt when coordinate values repeat heavily
    coords = np.round(pts.ravel(), 9)
    lattice_like = np.unique(coords).size < 0.9 * coords.size
    for attempt in range(1 if lattice_like else 0, 4):
        if attempt == 0:
            work = pts
        else:
            rng = np.random.default_rng(97 + attempt)
            work = pts + rng.uniform(-JITTER, JITTER, pts.shape)
        try:
            simp, cen, r2 = _build(work)
        except DegenerateSimplex as exc:
            last_exc = exc
            continue
        if _delaunay_ok(work, simp, cen, r2):
            # recompute spheres at the original coordinates when jittered
            if attempt > 0:
                try:
                    cen, r2 = _batch_circumspheres(pts[simp])
                except np.linalg.LinAlgError as exc:
                    last_exc = exc
                    continue
                if not np.all(np.isfinite(cen)):
                    last_exc = DegenerateSimplex("non-finite circumcenter")
                    continue
            return Triangulation(pts, simp, cen, r2)
        last_exc = DegenerateSimplex("empty-circumsphere self-check failed")
    raise NotEnoughPoints(f"triangulation failed after jitter retries: {last_exc}")
