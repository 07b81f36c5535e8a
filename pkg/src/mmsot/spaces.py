"""Finite metric measure spaces: points, distances, reference weights.

A space is a finite point set with an exact symmetric distance matrix and a
nonnegative reference weight per point (the ambient measure m).  Probability
measures on a space are weight vectors over the same point list.  Spaces are
immutable once built; all operations return new objects.

Reference weights are stored twice: as a float array for numerics and as exact
``Fraction`` values for the transport core.  Builders construct the exact
values first, so weights like 1/3 survive untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .rationals import as_fraction, float_vector, fraction_vector

__all__ = [
    "ValidationReport",
    "validate_metric",
    "MetricGraph",
    "FiniteMetricMeasureSpace",
    "from_metric_graph",
    "DiscreteMeasure",
    "restrict_and_normalize",
    "mutually_singular",
]

TOL_METRIC = 1e-9

# Full O(n^3) triangle checking is skipped above this size at construction
# time (callers can still run validate_metric explicitly).
_TRIANGLE_CHECK_MAX = 400

_REPORT_CAP = 50


@dataclass
class ValidationReport:
    """Outcome of a metric check: empty violation lists mean a valid metric."""

    symmetry: list[tuple[int, int]] = field(default_factory=list)
    diagonal: list[int] = field(default_factory=list)
    off_diagonal_zero: list[tuple[int, int]] = field(default_factory=list)
    triangle: list[tuple[int, int, int]] = field(default_factory=list)
    triangle_checked: bool = True

    @property
    def is_valid(self) -> bool:
        return not (self.symmetry or self.diagonal
                    or self.off_diagonal_zero or self.triangle)

    def summary(self) -> str:
        if self.is_valid:
            note = "" if self.triangle_checked else " (triangle inequality not checked)"
            return "valid metric" + note
        parts = []
        for name in ("symmetry", "diagonal", "off_diagonal_zero", "triangle"):
            hits = getattr(self, name)
            if hits:
                parts.append(f"{name}: {len(hits)} violation(s), first {hits[0]}")
        return "; ".join(parts)


def validate_metric(dist: np.ndarray, tol: float = TOL_METRIC,
                    check_triangle: bool = True) -> ValidationReport:
    """Check symmetry, diagonal and triangle inequality of a distance matrix.

    Structural problems (non-square, NaN/inf, negative entries) raise
    ``ValueError``; metric violations are collected in the report, capped at
    a small number per category.

    Parameters
    ----------
    dist : (n, n) ndarray
    tol : float
        Absolute tolerance for all comparisons.
    check_triangle : bool
        The triangle loop is O(n^3); disable for large matrices.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix contains NaN or inf")
    if np.any(d < -tol):
        raise ValueError("distance matrix contains negative entries")

    n = d.shape[0]
    report = ValidationReport(triangle_checked=check_triangle)

    asym = np.argwhere(np.abs(d - d.T) > tol)
    report.symmetry = [tuple(map(int, ij)) for ij in asym[:_REPORT_CAP] if ij[0] < ij[1]]
    report.diagonal = [int(i) for i in np.flatnonzero(np.abs(np.diag(d)) > tol)[:_REPORT_CAP]]

    offzero = np.argwhere((d <= tol) & ~np.eye(n, dtype=bool))
    report.off_diagonal_zero = [tuple(map(int, ij)) for ij in offzero[:_REPORT_CAP]
                                if ij[0] < ij[1]]

    if check_triangle:
        for k in range(n):
            slack = d[:, k, None] + d[None, k, :] - d
            bad = np.argwhere(slack < -tol)
            for i, j in bad:
                if i != k and j != k and i != j:
                    report.triangle.append((int(i), int(j), int(k)))
                    if len(report.triangle) >= _REPORT_CAP:
                        return report
    return report


@dataclass(frozen=True)
class MetricGraph:
    """A weighted graph whose edges carry positive lengths.

    ``h`` is the subdivision step used by :func:`from_metric_graph`: each edge
    of length L is cut into ceil(L/h) pieces of equal length <= h.
    Parallel edges and self-loop-free multigraphs are allowed (a circle is two
    parallel edges between two vertices).
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    h: float

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        vs = set(self.vertices)
        if self.h <= 0:
            raise ValueError("subdivision step h must be positive")
        for u, v, length in self.edges:
            if u not in vs or v not in vs:
                raise ValueError(f"edge ({u}, {v}) references unknown vertex")
            if u == v:
                raise ValueError("self-loops are not supported; split them in two")
            if not (length > 0 and np.isfinite(length)):
                raise ValueError(f"edge ({u}, {v}) must have positive finite length")


class FiniteMetricMeasureSpace:
    """Point ids, an exact distance matrix and reference weights.

    Parameters
    ----------
    point_ids : sequence of str
        Unique ids; order fixes the index space used everywhere else.
    dist : (n, n) array_like
    ref_weights : sequence of numbers or Fractions
        Reference measure weights, >= 0, at least one positive.  Zero weights
        are only legal for points flagged in ``aux`` (auxiliary grid points).
    labels : optional list of dicts
        Free-form per-point payload (planar coordinates, arclengths, ...).
    aux : iterable of int
        Indices of auxiliary points allowed to carry zero weight.
    h : optional float
        Discretization step if the space came from a grid; used for
        tolerance slack in curvature checks.
    adjacency : optional sequence of (i, j) pairs
        Neighbor structure for geodesic enumeration.  Spaces without one fall
        back to a betweenness-based adjacency computed on demand.
    """

    def __init__(self, point_ids: Sequence[str], dist, ref_weights,
                 labels: list[dict] | None = None,
                 aux: Iterable[int] = (),
                 h: float | None = None,
                 adjacency: Sequence[tuple[int, int]] | None = None,
                 check: str = "auto"):
        self.point_ids = tuple(str(p) for p in point_ids)
        if len(set(self.point_ids)) != len(self.point_ids):
            raise ValueError("point ids must be unique")
        n = len(self.point_ids)

        self.dist = np.array(dist, dtype=float)
        if self.dist.shape != (n, n):
            raise ValueError(f"dist shape {self.dist.shape} does not match {n} points")

        self.ref_weights_exact = fraction_vector(ref_weights)
        if len(self.ref_weights_exact) != n:
            raise ValueError("ref_weights length does not match point count")
        if any(w < 0 for w in self.ref_weights_exact):
            raise ValueError("reference weights must be nonnegative")
        if all(w == 0 for w in self.ref_weights_exact):
            raise ValueError("reference measure must not vanish identically")
        self.aux = frozenset(int(i) for i in aux)
        for i, w in enumerate(self.ref_weights_exact):
            if w == 0 and i not in self.aux:
                raise ValueError(
                    f"point {self.point_ids[i]!r} has zero reference weight but is "
                    "not flagged as auxiliary")
        self.ref_weights = float_vector(self.ref_weights_exact)

        self.labels = labels
        if labels is not None and len(labels) != n:
            raise ValueError("labels length does not match point count")
        self.h = h
        self.adjacency = None
        if adjacency is not None:
            self.adjacency = tuple(sorted({(min(i, j), max(i, j))
                                           for i, j in adjacency if i != j}))

        if check != "none":
            do_triangle = check == "full" or (check == "auto" and n <= _TRIANGLE_CHECK_MAX)
            report = validate_metric(self.dist, check_triangle=do_triangle)
            if not report.is_valid:
                raise ValueError(f"invalid metric: {report.summary()}")

        self.dist.setflags(write=False)
        self.ref_weights.setflags(write=False)
        self._index = {p: i for i, p in enumerate(self.point_ids)}
        self._neighbor_cache: tuple[tuple[int, ...], ...] | None = None

    # -- basic queries ------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.point_ids)

    def index(self, point) -> int:
        """Resolve a point reference (index or id string) to an index."""
        if isinstance(point, (int, np.integer)):
            i = int(point)
            if not 0 <= i < self.n:
                raise KeyError(f"point index {i} out of range")
            return i
        try:
            return self._index[str(point)]
        except KeyError:
            raise KeyError(f"unknown point id {point!r}") from None

    def ball(self, center, radius: float, tol: float = 1e-12) -> np.ndarray:
        """Indices of the closed ball around ``center``."""
        c = self.index(center)
        return np.flatnonzero(self.dist[c] <= radius + tol)

    def total_mass_exact(self) -> Fraction:
        return sum(self.ref_weights_exact, Fraction(0))

    def validate(self, tol: float = TOL_METRIC) -> ValidationReport:
        return validate_metric(self.dist, tol=tol)

    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Adjacency lists; computed from betweenness when no graph is attached.

        The fallback connects i and j when no third point k lies metrically
        between them (d(i,k) + d(k,j) <= d(i,j) + tol).  On grid spaces this
        recovers the grid edges; it costs O(n^3) vectorized and is cached.
        """
        if self._neighbor_cache is not None:
            return self._neighbor_cache
        n = self.n
        if self.adjacency is not None:
            lists: list[list[int]] = [[] for _ in range(n)]
            for i, j in self.adjacency:
                lists[i].append(j)
                lists[j].append(i)
        else:
            d = self.dist
            tol = 1e-9 + 1e-9 * float(d.max(initial=0.0))
            lists = [[] for _ in range(n)]
            for i in range(n):
                through = d[i, :, None] + d  # through[k, j] = d(i,k) + d(k,j)
                through[i, :] = np.inf
                np.fill_diagonal(through, np.inf)
                blocked = (through <= d[i] + tol).any(axis=0)
                for j in range(n):
                    if j != i and not blocked[j]:
                        lists[i].append(j)
        self._neighbor_cache = tuple(tuple(sorted(adj)) for adj in lists)
        return self._neighbor_cache

    def __repr__(self) -> str:
        return (f"FiniteMetricMeasureSpace(n={self.n}, "
                f"mass={float(self.total_mass_exact()):.6g}, h={self.h})")


def from_metric_graph(graph: MetricGraph,
                      vertex_labels: dict[str, dict] | None = None) -> FiniteMetricMeasureSpace:
    """Discretize a metric graph into a space.

    Each edge of length L is subdivided into k = ceil(L/h) equal pieces;
    interior points are named "u|v|i" (i = 1..k-1).  Distances are all-pairs
    shortest paths on the subdivision graph.  Reference weights are length
    shares: every point receives half the length of each incident piece, so
    the total reference mass equals the total edge length, exactly, in
    rational arithmetic.
    """
    ids: list[str] = list(graph.vertices)
    index: dict[str, int] = {v: i for i, v in enumerate(ids)}
    shares: list[Fraction] = [Fraction(0)] * len(ids)
    labels: list[dict] = [dict(vertex_labels.get(v, {})) if vertex_labels else {}
                          for v in graph.vertices]
    for lab, v in zip(labels, graph.vertices):
        lab.setdefault("vertex", v)

    rows: list[int] = []
    cols: list[int] = []
    lens: list[float] = []
    adjacency: list[tuple[int, int]] = []

    def add_point(pid: str, label: dict) -> int:
        index[pid] = len(ids)
        ids.append(pid)
        shares.append(Fraction(0))
        labels.append(label)
        return index[pid]

    def add_edge(i: int, j: int, step: Fraction):
        rows.append(i)
        cols.append(j)
        lens.append(float(step))
        adjacency.append((i, j))
        shares[i] += step / 2
        shares[j] += step / 2

    h_exact = as_fraction(graph.h)
    for u, v, length in graph.edges:
        L = as_fraction(length)
        k = int(-(-L // h_exact))  # ceil(L / h)
        step = L / k
        prev = index[u]
        for i in range(1, k):
            pid = f"{u}|{v}|{i}"
            if pid in index:
                raise ValueError(f"subdivision id collision at {pid!r}")
            cur = add_point(pid, {"edge": (u, v), "s": float(i * step)})
            add_edge(prev, cur, step)
            prev = cur
        add_edge(prev, index[v], step)

    n = len(ids)
    w = np.array(lens + lens)
    r = np.array(rows + cols)
    c = np.array(cols + rows)
    sparse = csr_matrix((w, (r, c)), shape=(n, n))
    ncomp, _ = connected_components(sparse, directed=False)
    if ncomp != 1:
        raise ValueError("metric graph is not connected")
    dist = dijkstra(sparse, directed=False)

    return FiniteMetricMeasureSpace(
        ids, dist, shares, labels=labels, h=float(graph.h),
        adjacency=adjacency, check="auto")


class DiscreteMeasure:
    """A weighted point measure on a fixed space.

    Weights are exact Fractions with a float view.  ``probability=True``
    (default) enforces total mass 1: exactly when the weights are exact,
    within 1e-12 when they came in as floats.
    """

    MASS_TOL = 1e-12

    def __init__(self, space: FiniteMetricMeasureSpace, weights,
                 probability: bool = True):
        self.space = space
        self.exact = fraction_vector(weights)
        if len(self.exact) != space.n:
            raise ValueError("weight vector length does not match the space")
        if any(w < 0 for w in self.exact):
            raise ValueError("measure weights must be nonnegative")
        self.probability = bool(probability)
        if self.probability:
            total = self.mass_exact()
            if total != 1 and abs(float(total) - 1.0) > self.MASS_TOL:
                raise ValueError(f"probability measure has mass {float(total)!r}")
        self.weights = float_vector(self.exact)
        self.weights.setflags(write=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def dirac(cls, space: FiniteMetricMeasureSpace, point) -> "DiscreteMeasure":
        w = [Fraction(0)] * space.n
        w[space.index(point)] = Fraction(1)
        return cls(space, w)

    @classmethod
    def uniform_on(cls, space: FiniteMetricMeasureSpace, points) -> "DiscreteMeasure":
        idx = [space.index(p) for p in points]
        if not idx:
            raise ValueError("cannot build a uniform measure on an empty set")
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate points in uniform_on")
        w = [Fraction(0)] * space.n
        share = Fraction(1, len(idx))
        for i in idx:
            w[i] = share
        return cls(space, w)

    @classmethod
    def mixture(cls, parts: Sequence[tuple["DiscreteMeasure", object]]) -> "DiscreteMeasure":
        """Convex (or conic) combination sum_k coef_k * mu_k, exact."""
        if not parts:
            raise ValueError("empty mixture")
        space = parts[0][0].space
        acc = [Fraction(0)] * space.n
        for mu, coef in parts:
            if mu.space is not space:
                raise ValueError("mixture components live on different spaces")
            c = as_fraction(coef)
            for i, w in enumerate(mu.exact):
                if w:
                    acc[i] += c * w
        total = sum(acc, Fraction(0))
        return cls(space, acc, probability=(total == 1))

    # -- queries ------------------------------------------------------------

    def mass_exact(self) -> Fraction:
        return sum(self.exact, Fraction(0))

    @property
    def mass(self) -> float:
        return float(self.mass_exact())

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.exact) if w > 0)

    @property
    def ac_flag(self) -> bool:
        """True when the measure only charges points with positive reference weight."""
        ref = self.space.ref_weights_exact
        return all(ref[i] > 0 for i, w in enumerate(self.exact) if w > 0)

    def mass_of(self, points) -> Fraction:
        idx = {self.space.index(p) for p in points}
        return sum((self.exact[i] for i in idx), Fraction(0))

    def normalized(self) -> "DiscreteMeasure":
        total = self.mass_exact()
        if total == 0:
            raise ValueError("cannot normalize the zero measure")
        return DiscreteMeasure(self.space, [w / total for w in self.exact],
                               probability=True)

    def same_weights(self, other: "DiscreteMeasure") -> bool:
        return self.space is other.space and self.exact == other.exact

    def __repr__(self) -> str:
        kind = "probability" if self.probability else "measure"
        return (f"DiscreteMeasure({kind}, support={len(self.support())} pts, "
                f"mass={self.mass:.6g})")


def restrict_and_normalize(space: FiniteMetricMeasureSpace, points,
                           measure: DiscreteMeasure | None = None) -> DiscreteMeasure:
    """Normalized restriction of the reference measure (or ``measure``) to a set.

    Raises ``ValueError("degenerate restriction")`` when the set carries no
    mass.
    """
    idx = sorted({space.index(p) for p in points})
    base = measure.exact if measure is not None else space.ref_weights_exact
    w = [Fraction(0)] * space.n
    for i in idx:
        w[i] = base[i]
    total = sum(w, Fraction(0))
    if total == 0:
        raise ValueError("degenerate restriction")
    return DiscreteMeasure(space, [x / total for x in w], probability=True)


def mutually_singular(mu: DiscreteMeasure, nu: DiscreteMeasure) -> bool:
    """True when the two measures charge disjoint point sets."""
    if mu.space is not nu.space:
        raise ValueError("measures live on different spaces")
    return not (set(mu.support()) & set(nu.support()))
