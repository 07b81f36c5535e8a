"""Discrete geodesics: shortest point chains, evaluation, branching detection.

A geodesic between u and v is a chain of points whose consecutive-distance sum
equals d(u, v) up to the relative tolerance TOL_GEO_REL * length.  Chains walk
the space's neighbor structure (grid edges for spaces built from graphs, the
metric betweenness graph otherwise), so a path-graph space has exactly one
geodesic between any two points while a circle has two between antipodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import FiniteMetricMeasureSpace

__all__ = [
    "GeodesicPath",
    "GeodesicSet",
    "BranchConfiguration",
    "enumerate_geodesics",
    "evaluate",
    "restrict",
    "find_branching",
]

TOL_GEO_REL = 1e-6


def _tol(length: float) -> float:
    return TOL_GEO_REL * max(length, 1.0e-30) + 1e-15


@dataclass(frozen=True)
class GeodesicPath:
    """An ordered point chain realizing the distance between its endpoints."""

    space: FiniteMetricMeasureSpace
    points: tuple[int, ...]
    cum: tuple[float, ...]  # cumulative arclength, cum[0] == 0

    def __post_init__(self):
        if len(self.points) != len(self.cum) or not self.points:
            raise ValueError("points and cumulative arclengths must align")

    @property
    def length(self) -> float:
        return self.cum[-1]

    @property
    def start(self) -> int:
        return self.points[0]

    @property
    def end(self) -> int:
        return self.points[-1]

    def ids(self) -> tuple[str, ...]:
        return tuple(self.space.point_ids[p] for p in self.points)

    def is_geodesic(self) -> bool:
        d = self.space.dist[self.start, self.end]
        return abs(self.length - d) <= _tol(max(self.length, d))


@dataclass(frozen=True)
class GeodesicSet:
    """Enumeration result; ``truncated`` marks a hit of the max_count cap."""

    paths: tuple[GeodesicPath, ...]
    truncated: bool = False

    def __iter__(self):
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, k) -> GeodesicPath:
        return self.paths[k]


def _chain(space: FiniteMetricMeasureSpace, pts: list[int]) -> GeodesicPath:
    cum = [0.0]
    for a, b in zip(pts, pts[1:]):
        cum.append(cum[-1] + float(space.dist[a, b]))
    return GeodesicPath(space, tuple(pts), tuple(cum))


def enumerate_geodesics(space: FiniteMetricMeasureSpace, u, v,
                        max_count: int = 64) -> GeodesicSet:
    """All distinct shortest chains from u to v, in lexicographic point order.

    The chains are exactly the u-v paths of the shortest-path DAG: a neighbor
    step z -> w qualifies when d(u,z) + d(z,w) + d(w,v) == d(u,v) within
    tolerance and it makes strict progress away from u.  Enumeration stops at
    ``max_count`` with the truncation flag set.
    """
    iu, iv = space.index(u), space.index(v)
    if iu == iv:
        return GeodesicSet((GeodesicPath(space, (iu,), (0.0,)),))
    d = space.dist
    total = float(d[iu, iv])
    if not np.isfinite(total):
        raise ValueError(
            f"no geodesic: {space.point_ids[iu]!r} and {space.point_ids[iv]!r} "
            "are disconnected")
    tol = _tol(total)
    nbrs = space.neighbors()

    found: list[GeodesicPath] = []
    truncated = False
    stack = [iu]

    def dfs(z: int) -> bool:
        """Returns False once the cap is hit to unwind the recursion."""
        nonlocal truncated
        if z == iv:
            if len(found) >= max_count:
                truncated = True
                return False
            found.append(_chain(space, list(stack)))
            return True
        for w in nbrs[z]:
            step = float(d[z, w])
            on_path = d[iu, z] + step + d[w, iv] <= total + tol
            progress = d[iu, w] >= d[iu, z] + step - tol
            if on_path and progress:
                stack.append(w)
                ok = dfs(w)
                stack.pop()
                if not ok:
                    return False
        return True

    dfs(iu)
    if not found and not truncated:
        raise ValueError(
            "no geodesic chain found; the neighbor structure does not resolve "
            f"the pair ({space.point_ids[iu]!r}, {space.point_ids[iv]!r})")
    return GeodesicSet(tuple(found), truncated)


def evaluate(path: GeodesicPath, t: float) -> int:
    """Point index at normalized time t, snapped to the nearest chain point.

    Endpoints are exact: t=0 gives the start, t=1 the end.  Interior times
    snap to the chain point whose arclength is closest; ties take the earlier
    point.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"time {t} outside [0, 1]")
    if t == 0.0 or path.length == 0.0:
        return path.start
    if t == 1.0:
        return path.end
    target = t * path.length
    k = int(np.argmin(np.abs(np.asarray(path.cum) - target)))
    return path.points[k]


def restrict(path: GeodesicPath, s: float, t: float) -> GeodesicPath:
    """Subchain between the snapped points at times s < t, rebased to [0, 1].

    When s*L and t*L land on chain arclengths the restriction has length
    exactly (t - s) * L; otherwise snapping moves the endpoints by at most
    half a grid step each.
    """
    if not 0.0 <= s < t <= 1.0:
        raise ValueError(f"need 0 <= s < t <= 1, got ({s}, {t})")
    if path.length == 0.0:
        return path
    target_s, target_t = s * path.length, t * path.length
    cum = np.asarray(path.cum)
    ks = int(np.argmin(np.abs(cum - target_s)))
    kt = int(np.argmin(np.abs(cum - target_t)))
    if ks == kt:
        raise ValueError("restriction collapses to a single point")
    base = path.cum[ks]
    return GeodesicPath(path.space, path.points[ks:kt + 1],
                        tuple(c - base for c in path.cum[ks:kt + 1]))


@dataclass(frozen=True)
class BranchConfiguration:
    """Two equal-length geodesics from a point that split toward distinct ends.

    ``witness`` is a point that sees both endpoints through the basepoint
    (d(p, e) = d(p, x) + d(x, e) for both endpoints): it certifies that the
    two geodesics continue a common incoming direction, which is what
    separates genuine branching from the two sides of an interval.
    """

    basepoint: int
    alpha: GeodesicPath
    beta: GeodesicPath
    witness: int

    @property
    def shared_prefix(self) -> tuple[int, ...]:
        pref = []
        for a, b in zip(self.alpha.points, self.beta.points):
            if a != b:
                break
            pref.append(a)
        return tuple(pref)

    def check(self, tol: float | None = None) -> None:
        space = self.alpha.space
        d = space.dist
        la, lb = self.alpha.length, self.beta.length
        eps = tol if tol is not None else _tol(max(la, lb))
        if abs(la - lb) > eps:
            raise AssertionError(f"branch lengths differ: {la} vs {lb}")
        ea, eb = self.alpha.end, self.beta.end
        if ea == eb:
            raise AssertionError("branch endpoints coincide")
        if not self.shared_prefix:
            raise AssertionError("branches share no initial point")
        x, p = self.basepoint, self.witness
        for e in (ea, eb):
            if abs(d[p, e] - (d[p, x] + d[x, e])) > eps:
                raise AssertionError("witness does not see both endpoints through x")


def find_branching(space: FiniteMetricMeasureSpace, x, radius: float,
                   max_count: int = 16) -> BranchConfiguration | None:
    """Search for a branching configuration at x within the closed ball.

    Candidate pairs are endpoints (e1, e2) equidistant from x (within
    tolerance) admitting a through-x witness; among them the pair of maximal
    branching radius wins, tie-broken by lexicographically minimal endpoint
    ids.  Returns None when no pair qualifies, in particular for every point
    of a path-graph space.
    """
    ix = space.index(x)
    d = space.dist
    inside = np.flatnonzero(d[ix] <= radius + _tol(radius))
    inside = inside[inside != ix]
    if len(inside) < 2:
        return None

    tol = _tol(float(d[ix, inside].max()))
    others = np.arange(space.n) != ix

    best: tuple[float, str, str, int, int, int] | None = None
    for a_pos in range(len(inside)):
        e1 = int(inside[a_pos])
        r1 = float(d[ix, e1])
        if best is not None and r1 < best[0] - tol:
            continue
        sees_e1 = np.abs(d[:, e1] - (d[:, ix] + r1)) <= tol
        for b_pos in range(a_pos + 1, len(inside)):
            e2 = int(inside[b_pos])
            r2 = float(d[ix, e2])
            if abs(r1 - r2) > tol:
                continue
            if best is not None and r1 < best[0] - tol:
                continue
            sees_both = sees_e1 & (np.abs(d[:, e2] - (d[:, ix] + r2)) <= tol) & others
            hits = np.flatnonzero(sees_both)
            if len(hits) == 0:
                continue
            id1, id2 = space.point_ids[e1], space.point_ids[e2]
            if id2 < id1:
                id1, id2, e1_, e2_ = id2, id1, e2, e1
            else:
                e1_, e2_ = e1, e2
            key = (r1, id1, id2, e1_, e2_, int(hits[0]))
            if best is None or key[0] > best[0] + tol or (
                    abs(key[0] - best[0]) <= tol and key[1:3] < best[1:3]):
                best = key

    if best is None:
        return None
    _, _, _, e1, e2, witness = best
    alpha = enumerate_geodesics(space, ix, e1, max_count=max_count)[0]
    beta = enumerate_geodesics(space, ix, e2, max_count=max_count)[0]
    config = BranchConfiguration(ix, alpha, beta, witness)
    config.check()
    return config
