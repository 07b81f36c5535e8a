"""Blow-up rescalings and one-dimensionality tests.

A pointed rescaled space is a metric ball around a basepoint with distances
multiplied by a scale factor.  The defect machinery measures how far such a
ball is from a line segment: signed radial coordinates give candidate maps
onto [-R, R], and the best achievable combination of metric distortion and
image density is the defect.  Growing scales with shrinking defect indicate a
line tangent; a scale-independent positive floor indicates an obstruction
(such as a branch point).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spaces import FiniteMetricMeasureSpace

__all__ = [
    "PointedRescaledSpace",
    "rescale_ball",
    "Correspondence",
    "gh_distance_exact",
    "gh_defect_heuristic",
    "interval_defect",
    "DefectDetails",
    "TangentLineReport",
    "tangent_line_test",
]

THETA_LINE = 0.05
THETA_OBSTRUCT = 0.1
GH_MAX_POINTS = 7


@dataclass(frozen=True)
class PointedRescaledSpace:
    """A ball around a basepoint with the metric scaled by a factor.

    ``members`` are indices into the base space; ``dist`` is the rescaled
    submatrix (scale * original distances).  ``degenerate`` flags a ball that
    contains only the basepoint.
    """

    base: FiniteMetricMeasureSpace
    base_point: int
    scale: float
    radius: float
    members: tuple[int, ...]
    basepoint_pos: int
    dist: np.ndarray

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def degenerate(self) -> bool:
        return self.n == 1

    def coordinates(self) -> np.ndarray:
        """Rescaled distances from the basepoint to every member."""
        return self.dist[self.basepoint_pos]

    def __repr__(self) -> str:
        return (f"PointedRescaledSpace(n={self.n}, scale={self.scale:g}, "
                f"R={self.radius:g})")


def rescale_ball(space: FiniteMetricMeasureSpace, x, scale: float,
                 radius: float) -> PointedRescaledSpace:
    """Restrict to the ball of rescaled radius ``radius`` and scale the metric.

    The selected points are those within original distance radius/scale of x.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not radius > 0:
        raise ValueError("radius must be positive")
    c = space.index(x)
    members = tuple(int(i) for i in space.ball(c, radius / scale))
    sub = space.dist[np.ix_(members, members)] * scale
    sub.setflags(write=False)
    return PointedRescaledSpace(
        base=space, base_point=c, scale=float(scale), radius=float(radius),
        members=members, basepoint_pos=members.index(c), dist=sub)


# ---------------------------------------------------------------------------
# Gromov-Hausdorff distance on tiny spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Correspondence:
    """A relation between two point sets, surjective onto both."""

    pairs: tuple[tuple[int, int], ...]
    nx: int
    ny: int
    distortion: float

    def __post_init__(self):
        xs = {i for i, _ in self.pairs}
        ys = {j for _, j in self.pairs}
        if xs != set(range(self.nx)) or ys != set(range(self.ny)):
            raise ValueError("correspondence is not surjective onto both factors")
        if self.distortion < 0:
            raise ValueError("distortion must be nonnegative")


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, PointedRescaledSpace):
        return np.asarray(obj.dist, dtype=float)
    if isinstance(obj, FiniteMetricMeasureSpace):
        return np.asarray(obj.dist, dtype=float)
    d = np.asarray(obj, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("expected a square distance matrix")
    return d


def _distortion(pairs, dx, dy) -> float:
    worst = 0.0
    for (i, j), (k, l) in itertools.combinations(pairs, 2):
        worst = max(worst, abs(dx[i, k] - dy[j, l]))
    return worst


def _feasible(dx, dy, eps) -> list | None:
    """Find a correspondence with distortion <= eps, or None.

    Searches maps x -> y first, then patches uncovered ys, pruning on every
    added pair.  Any correspondence contains such a two-phase sub-relation,
    so the search is exhaustive.
    """
    nx, ny = dx.shape[0], dy.shape[0]
    slop = eps + 1e-12
    pairs: list[tuple[int, int]] = []

    def compatible(i, j) -> bool:
        for k, l in pairs:
            if abs(dx[i, k] - dy[j, l]) > slop:
                return False
        return True

    def assign_x(i: int) -> bool:
        if i == nx:
            uncovered = [j for j in range(ny) if all(j != l for _, l in pairs)]
            return patch(uncovered, 0)
        for j in range(ny):
            if compatible(i, j):
                pairs.append((i, j))
                if assign_x(i + 1):
                    return True
                pairs.pop()
        return False

    def patch(uncovered: list, k: int) -> bool:
        if k == len(uncovered):
            return True
        j = uncovered[k]
        for i in range(nx):
            if compatible(i, j):
                pairs.append((i, j))
                if patch(uncovered, k + 1):
                    return True
                pairs.pop()
        return False

    return list(pairs) if assign_x(0) else None


def gh_distance_exact(X, Y, max_points: int = GH_MAX_POINTS):
    """Exact Gromov-Hausdorff distance between two tiny metric spaces.

    Computes half the minimal distortion over all correspondences by an
    exhaustive search driven by binary search on the candidate distortion
    values.  Inputs are distance matrices (or spaces / rescaled balls).

    Returns (value, Correspondence).  Sizes above ``max_points`` (capped at
    7) raise; use :func:`gh_defect_heuristic` for larger spaces.
    """
    dx, dy = _as_matrix(X), _as_matrix(Y)
    cap = min(int(max_points), GH_MAX_POINTS)
    if dx.shape[0] > cap or dy.shape[0] > cap:
        raise ValueError(
            f"space too large for exhaustive search (> {cap} points); "
            "use gh_defect_heuristic")

    cands = np.unique(np.abs(dx.reshape(-1, 1, 1, 1) - dy.reshape(1, 1, -1, 1))
                      .ravel())
    cands = np.unique(np.concatenate([[0.0], cands]))
    # binary search for the smallest feasible candidate
    lo, hi = 0, len(cands) - 1
    best_pairs = _feasible(dx, dy, float(cands[hi]))
    if best_pairs is None:
        raise RuntimeError("full relation infeasible; not a metric input?")
    while lo < hi:
        mid = (lo + hi) // 2
        found = _feasible(dx, dy, float(cands[mid]))
        if found is not None:
            best_pairs = found
            hi = mid
        else:
            lo = mid + 1
    value = float(cands[lo]) / 2.0
    corr = Correspondence(tuple(best_pairs), dx.shape[0], dy.shape[0],
                          _distortion(best_pairs, dx, dy))
    return value, corr


def gh_defect_heuristic(X, Y, restarts: int = 64, seed: int = 0):
    """Randomized upper bound on GH distance for spaces beyond the exact cap.

    Greedy map construction from shuffled point orders, keeping the best of
    ``restarts`` attempts.  Returns (value, Correspondence); the value is an
    upper bound, not the exact distance.
    """
    dx, dy = _as_matrix(X), _as_matrix(Y)
    nx, ny = dx.shape[0], dy.shape[0]
    rng = np.random.default_rng(seed)
    best: list | None = None
    best_dist = np.inf
    for _ in range(restarts):
        order = rng.permutation(nx)
        pairs: list[tuple[int, int]] = []
        for i in order:
            cand_j, cand_val = 0, np.inf
            for j in range(ny):
                val = max((abs(dx[i, k] - dy[j, l]) for k, l in pairs),
                          default=0.0)
                if val < cand_val:
                    cand_j, cand_val = j, val
            pairs.append((int(i), cand_j))
        covered = {j for _, j in pairs}
        for j in range(ny):
            if j in covered:
                continue
            cand_i, cand_val = 0, np.inf
            for i in range(nx):
                val = max((abs(dx[i, k] - dy[j, l]) for k, l in pairs),
                          default=0.0)
                if val < cand_val:
                    cand_i, cand_val = i, val
            pairs.append((cand_i, j))
        dist = _distortion(pairs, dx, dy)
        if dist < best_dist:
            best, best_dist = pairs, dist
    corr = Correspondence(tuple(best), nx, ny, best_dist)
    return best_dist / 2.0, corr


# ---------------------------------------------------------------------------
# defect against a line segment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DefectDetails:
    """Best signed-coordinate assignment found by interval_defect."""

    epsilon: float
    distortion: float
    density_gap: float
    branch_count: int
    signs: tuple[int, ...]
    exhaustive: bool
    degenerate: bool


def _branches(pointed: PointedRescaledSpace) -> list[list[int]]:
    """Connected components of the ball minus the basepoint (member positions)."""
    members = pointed.members
    member_pos = {m: k for k, m in enumerate(members)}
    adj = pointed.base.neighbors()
    n = pointed.n
    seen = [False] * n
    seen[pointed.basepoint_pos] = True
    comps: list[list[int]] = []
    for start in range(n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        stack = [start]
        while stack:
            k = stack.pop()
            for nb in adj[members[k]]:
                pos = member_pos.get(nb)
                if pos is not None and not seen[pos]:
                    seen[pos] = True
                    comp.append(pos)
                    stack.append(pos)
        comps.append(sorted(comp))
    return comps


def _assignment_defect(signed: np.ndarray, dist: np.ndarray, radius: float):
    diff = np.abs(signed[:, None] - signed[None, :])
    distortion = float(np.max(np.abs(diff - dist)))
    s = np.sort(signed)
    gaps = np.diff(s)
    density = max(float(s[0] + radius), float(radius - s[-1]),
                  float(gaps.max(initial=0.0)) / 2.0, 0.0)
    return distortion, density


def interval_defect(pointed: PointedRescaledSpace,
                    return_details: bool = False,
                    max_exhaustive_branches: int = 12):
    """Smallest quasi-isometry defect onto the segment [-R, R].

    Candidate maps send each point p to sign(branch(p)) * rescaled d(x, p),
    one sign per connected branch of the ball minus the basepoint.  The
    defect of an assignment is the larger of its metric distortion and the
    covering gap of its image in [-R, R]; the minimum over assignments is
    returned (exhaustive for at most ``max_exhaustive_branches`` branches,
    greedy beyond).

    A ball containing only the basepoint has defect R by the density term
    alone; it is reported with the ``degenerate`` flag rather than an error
    so that schedule sweeps can keep going.
    """
    radius = pointed.radius
    coords = pointed.coordinates()
    if pointed.degenerate:
        details = DefectDetails(radius, 0.0, radius, 0, (), True, True)
        return (radius, details) if return_details else radius

    comps = _branches(pointed)
    k = len(comps)
    base_pos = pointed.basepoint_pos

    def build_signed(signs) -> np.ndarray:
        signed = np.zeros(pointed.n)
        for comp, sg in zip(comps, signs):
            for pos in comp:
                signed[pos] = sg * coords[pos]
        signed[base_pos] = 0.0
        return signed

    best = None
    if k <= max_exhaustive_branches:
        exhaustive = True
        for rest in itertools.product((1, -1), repeat=k - 1):
            signs = (1,) + rest
            distortion, density = _assignment_defect(
                build_signed(signs), pointed.dist, radius)
            eps = max(distortion, density)
            if best is None or eps < best[0]:
                best = (eps, distortion, density, signs)
    else:
        exhaustive = False
        order = sorted(range(k), key=lambda c: -max(coords[p] for p in comps[c]))
        signs_by_comp = [0] * k
        chosen: list[int] = []
        for c in order:
            cand = None
            for sg in (1, -1):
                signs_by_comp[c] = sg
                trial = [signs_by_comp[cc] if signs_by_comp[cc] else 1
                         for cc in range(k)]
                distortion, density = _assignment_defect(
                    build_signed(trial), pointed.dist, radius)
                eps = max(distortion, density)
                if cand is None or eps < cand[0]:
                    cand = (eps, sg)
            signs_by_comp[c] = cand[1]
            chosen.append(cand[1])
        signs = tuple(signs_by_comp)
        distortion, density = _assignment_defect(
            build_signed(signs), pointed.dist, radius)
        best = (max(distortion, density), distortion, density, signs)

    eps, distortion, density, signs = best
    details = DefectDetails(eps, distortion, density, k, signs, exhaustive, False)
    return (eps, details) if return_details else eps


# ---------------------------------------------------------------------------
# defect curves over a scale schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangentLineReport:
    """Defect per scale plus a qualitative verdict.

    The verdict is an observation about this schedule only:

    * "obstructed": every non-degenerate scale has defect >= theta_obstruct.
    * "line-tangent-consistent": some usable scale dips to theta_line or
      below, and from the first dip onward every usable scale stays within
      theta_line plus the grid-noise allowance scale * h.
    * "inconclusive": anything else (including all-degenerate schedules).

    A scale is "usable" when its ball is not degenerate and its grid noise
    scale * h stays below R/2.
    """

    basepoint: str
    radius: float
    rows: tuple[tuple[float, float, bool], ...]  # (scale, defect, degenerate)
    verdict: str
    theta_line: float = THETA_LINE
    theta_obstruct: float = THETA_OBSTRUCT

    @property
    def min_defect(self) -> float:
        vals = [e for _, e, deg in self.rows if not deg]
        return min(vals) if vals else float("nan")

    def csv_rows(self):
        return [(lam, eps, self.verdict) for lam, eps, _ in self.rows]


def tangent_line_test(space: FiniteMetricMeasureSpace, x, scale_schedule,
                      radius: float = 1.0) -> TangentLineReport:
    """Sweep blow-up scales at a point and classify the defect curve.

    Parameters
    ----------
    space : FiniteMetricMeasureSpace
    x : point reference
    scale_schedule : increasing sequence of scales
    radius : rescaled ball radius (default 1.0)
    """
    scales = [float(s) for s in scale_schedule]
    if not scales:
        raise ValueError("empty scale schedule")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scale schedule must be increasing")
    if any(s <= 0 for s in scales):
        raise ValueError("scales must be positive")

    h = float(space.h) if space.h is not None else 0.0
    rows = []
    for lam in scales:
        pointed = rescale_ball(space, x, lam, radius)
        if pointed.degenerate:
            rows.append((lam, radius, True))
        else:
            rows.append((lam, float(interval_defect(pointed)), False))

    nondeg = [(lam, eps) for lam, eps, deg in rows if not deg]
    usable = [(lam, eps) for lam, eps in nondeg if lam * h <= radius / 2]

    verdict = "inconclusive"
    if nondeg and all(eps >= THETA_OBSTRUCT for _, eps in nondeg):
        verdict = "obstructed"
    else:
        dip = next((k for k, (lam, eps) in enumerate(usable)
                    if eps <= THETA_LINE), None)
        if dip is not None and all(
                eps <= THETA_LINE + lam * h for lam, eps in usable[dip:]):
            verdict = "line-tangent-consistent"

    return TangentLineReport(
        basepoint=space.point_ids[space.index(x)], radius=float(radius),
        rows=tuple(rows), verdict=verdict)
