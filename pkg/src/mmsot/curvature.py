"""Ball-growth diagnostics: comparison profiles, distance binning, contraction.

Everything here treats the reference measure (or an explicit measure) as the
object under test.  Verdicts are observations about the sampled radii and
bins, with explicit discretization slack; they are not certificates about a
continuum space.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .geodesics import enumerate_geodesics, evaluate
from .spaces import DiscreteMeasure, FiniteMetricMeasureSpace

__all__ = [
    "ComparisonProfile",
    "BallGrowthCurve",
    "bg_ratio_curve",
    "PolarDecomposition",
    "polar_decompose",
    "annulus_ball_table",
    "ContractionReport",
    "nondegeneracy_check",
    "ScalingReport",
    "contraction_zero_set_check",
]

TOL_BG = 1e-9


class ComparisonProfile:
    """A positive weight function w(r) on (0, R] used to normalize ball masses.

    Built either from a callable or from tabulated values (piecewise-linear
    interpolation).  Evaluation raises when w(r) <= 0 or when r leaves the
    domain.

    Parameters
    ----------
    w : callable
        Scalar function of the radius.
    domain_radius : float
        Upper end R of the domain (0, R].
    name : str
        Display name used in reports.
    """

    def __init__(self, w: Callable[[float], float], domain_radius: float,
                 name: str = "custom"):
        if not domain_radius > 0:
            raise ValueError("domain radius must be positive")
        self._w = w
        self.domain_radius = float(domain_radius)
        self.name = name
        self.table: tuple[tuple[float, float], ...] | None = None
        self.max_difference_quotient: float | None = None

    @classmethod
    def linear(cls, domain_radius: float = 1.0) -> "ComparisonProfile":
        """w(r) = 2r, the flat one-dimensional growth profile."""
        return cls(lambda r: 2.0 * r, domain_radius, name="linear")

    @classmethod
    def power(cls, exponent: float, coefficient: float = 1.0,
              domain_radius: float = 1.0) -> "ComparisonProfile":
        """w(r) = coefficient * r**exponent."""
        if exponent < 0:
            raise ValueError("exponent must be nonnegative")
        return cls(lambda r: coefficient * r ** exponent, domain_radius,
                   name=f"power({exponent:g})")

    @classmethod
    def constant(cls, value: float, domain_radius: float = 1.0) -> "ComparisonProfile":
        return cls(lambda r: value, domain_radius, name=f"constant({value:g})")

    @classmethod
    def from_table(cls, radii: Sequence[float],
                   values: Sequence[float]) -> "ComparisonProfile":
        """Piecewise-linear profile through (radii, values).

        Radii must be strictly increasing and values positive.  The maximal
        difference quotient over the grid is recorded as a crude regularity
        measure (it must be finite, which it always is on a strict grid).
        """
        r = np.asarray(radii, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
            raise ValueError("need matching 1-d radii and values, length >= 2")
        if not np.all(np.diff(r) > 0):
            raise ValueError("radii must be strictly increasing")
        if np.any(v <= 0):
            raise ValueError("tabulated profile values must be positive")

        def w(x: float) -> float:
            return float(np.interp(x, r, v))

        prof = cls(w, float(r[-1]), name="table")
        prof.table = tuple((float(a), float(b)) for a, b in zip(r, v))
        prof.max_difference_quotient = float(np.max(np.abs(np.diff(v) / np.diff(r))))
        return prof

    def __call__(self, r: float) -> float:
        if not 0 < r <= self.domain_radius * (1 + 1e-12):
            raise ValueError(f"radius {r} outside profile domain "
                             f"(0, {self.domain_radius}]")
        val = float(self._w(float(r)))
        if not val > 0:
            raise ValueError(f"profile {self.name} is not positive at r={r}: {val}")
        return val

    def __repr__(self) -> str:
        return f"ComparisonProfile({self.name}, R={self.domain_radius:g})"


@dataclass(frozen=True)
class BallGrowthCurve:
    """Sampled ratios m(B(x0, r)) / w(r) with a monotonicity verdict.

    ``violations`` lists (index, ratio_k, ratio_{k+1}, allowed_slack) for each
    adjacent pair where the ratio increased beyond tolerance + slack.
    """

    basepoint: str
    radii: tuple[float, ...]
    masses: tuple[float, ...]
    w_values: tuple[float, ...]
    ratios: tuple[float, ...]
    slacks: tuple[float, ...]
    nonincreasing: bool
    violations: tuple[tuple[int, float, float, float], ...]

    def rows(self):
        """CSV-ready rows (r, ball_mass, w, ratio)."""
        return list(zip(self.radii, self.masses, self.w_values, self.ratios))


def _step_estimate(space: FiniteMetricMeasureSpace) -> float:
    if space.h is not None:
        return float(space.h)
    d = space.dist
    off = d[~np.eye(space.n, dtype=bool)]
    positive = off[off > 0]
    return float(positive.min()) if positive.size else 0.0


def bg_ratio_curve(space: FiniteMetricMeasureSpace, x0,
                   profile: ComparisonProfile, radii,
                   measure: DiscreteMeasure | None = None) -> BallGrowthCurve:
    """Closed-ball mass over a comparison profile, radius by radius.

    The monotonicity verdict allows, between consecutive radii, a slack of
    ``h * rho / w(r_next)`` on top of 1e-9, where h is the grid step and rho
    an empirical density bound (largest mass increment per unit radius along
    the sampled curve).  A single grid layer entering the ball just past a
    sampled radius is therefore not flagged.

    Parameters
    ----------
    space : FiniteMetricMeasureSpace
    x0 : point reference
    profile : ComparisonProfile
    radii : increasing sequence within (0, R]
    measure : DiscreteMeasure, optional
        Defaults to the reference weights.
    """
    r = [float(x) for x in radii]
    if not r:
        raise ValueError("no radii given")
    if any(b <= a for a, b in zip(r, r[1:])):
        raise ValueError("radii must be strictly increasing")
    c = space.index(x0)
    weights = measure.exact if measure is not None else space.ref_weights_exact

    masses_exact = []
    for radius in r:
        idx = space.ball(c, radius)
        masses_exact.append(sum((weights[i] for i in idx), Fraction(0)))
    masses = [float(mx) for mx in masses_exact]
    wvals = [profile(radius) for radius in r]
    ratios = [mass / wv for mass, wv in zip(masses, wvals)]

    h_est = _step_estimate(space)
    dens = 0.0
    for k in range(len(r) - 1):
        dr = r[k + 1] - r[k]
        dens = max(dens, (masses[k + 1] - masses[k]) / dr)
    slacks = []
    violations = []
    for k in range(len(r) - 1):
        slack = h_est * dens / wvals[k + 1]
        slacks.append(slack)
        if ratios[k + 1] > ratios[k] + TOL_BG + slack:
            violations.append((k, ratios[k], ratios[k + 1], TOL_BG + slack))

    return BallGrowthCurve(
        basepoint=space.point_ids[c],
        radii=tuple(r), masses=tuple(masses), w_values=tuple(wvals),
        ratios=tuple(ratios), slacks=tuple(slacks),
        nonincreasing=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# polar decomposition by distance binning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarDecomposition:
    """Partition of the point set into distance bins around a basepoint.

    Bin k covers distances [edges[k], edges[k+1]), the last bin closed on the
    right.  Because the bins partition the points, integrating any function
    bin by bin reproduces its integral against the underlying measure
    exactly.
    """

    space: FiniteMetricMeasureSpace
    basepoint: int
    edges: tuple[float, ...]
    bin_points: tuple[tuple[int, ...], ...]
    bin_masses_exact: tuple[Fraction, ...]
    weights_exact: tuple[Fraction, ...]

    @property
    def bin_width(self) -> float:
        return self.edges[1] - self.edges[0]

    @property
    def densities(self) -> tuple[float, ...]:
        return tuple(float(mx) / (hi - lo) for mx, lo, hi in
                     zip(self.bin_masses_exact, self.edges, self.edges[1:]))

    def total_mass_exact(self) -> Fraction:
        return sum(self.bin_masses_exact, Fraction(0))

    def integrate(self, f) -> Fraction:
        """Sum of f over all bins, weighted; exact partition identity.

        ``f`` maps a point index to a number (Fraction or exact-convertible).
        """
        total = Fraction(0)
        for pts in self.bin_points:
            for i in pts:
                total += Fraction(f(i)) * self.weights_exact[i]
        return total

    def bin_of(self, r: float) -> int:
        if r < self.edges[0] or r > self.edges[-1]:
            raise ValueError(f"radius {r} outside binned range")
        k = int(np.searchsorted(self.edges, r, side="right")) - 1
        return min(max(k, 0), len(self.bin_points) - 1)

    def masses_within(self, center, radius: float) -> tuple[Fraction, ...]:
        """Per-bin mass of the intersection with the closed ball B(center, radius)."""
        ball = set(int(i) for i in self.space.ball(center, radius))
        out = []
        for pts in self.bin_points:
            out.append(sum((self.weights_exact[i] for i in pts if i in ball),
                           Fraction(0)))
        return tuple(out)


def polar_decompose(space: FiniteMetricMeasureSpace, x0, bin_width: float,
                    measure: DiscreteMeasure | None = None) -> PolarDecomposition:
    """Bin every point by its distance to x0.

    Bins run from 0 to the largest distance in steps of ``bin_width``; the
    basepoint itself lands in the first bin.  Per-bin densities are bin mass
    over bin width.
    """
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    c = space.index(x0)
    weights = measure.exact if measure is not None else space.ref_weights_exact
    dline = space.dist[c]
    rmax = float(dline.max())
    nbins = max(1, int(np.ceil(rmax / bin_width - 1e-12)))
    edges = [k * bin_width for k in range(nbins + 1)]
    if edges[-1] < rmax:
        edges[-1] = rmax  # guard against float shortfall on the last edge

    bins: list[list[int]] = [[] for _ in range(nbins)]
    for i in range(space.n):
        k = int(dline[i] // bin_width)
        if k >= nbins:
            k = nbins - 1
        bins[k].append(i)
    masses = tuple(sum((weights[i] for i in pts), Fraction(0)) for pts in bins)
    return PolarDecomposition(
        space=space, basepoint=c, edges=tuple(edges),
        bin_points=tuple(tuple(pts) for pts in bins),
        bin_masses_exact=masses, weights_exact=tuple(weights))


def annulus_ball_table(decomp: PolarDecomposition, y, z, radius: float):
    """Rows (bin_lo, bin_hi, annulus_mass, ball_y_mass, ball_z_mass).

    Used to inspect whether distance shells around the basepoint carry mass
    near two reference points simultaneously.
    """
    my = decomp.masses_within(y, radius)
    mz = decomp.masses_within(z, radius)
    rows = []
    for k in range(len(decomp.bin_points)):
        rows.append((decomp.edges[k], decomp.edges[k + 1],
                     float(decomp.bin_masses_exact[k]), float(my[k]), float(mz[k])))
    return rows


# ---------------------------------------------------------------------------
# geodesic contraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionReport:
    """Mass of the contracted set A_{t,x} for each requested t."""

    source_points: tuple[int, ...]
    toward: int
    rows: tuple[tuple[float, tuple[int, ...], Fraction], ...]
    truncated: bool

    @property
    def all_positive(self) -> bool:
        return all(mass > 0 for _, _, mass in self.rows)

    def failing_times(self):
        return [t for t, _, mass in self.rows if mass == 0]


def nondegeneracy_check(space: FiniteMetricMeasureSpace, A, x, t_grid,
                        measure: DiscreteMeasure | None = None,
                        max_count: int = 64) -> ContractionReport:
    """Contract the set A toward x along geodesics and weigh the images.

    For each t in ``t_grid`` (within [0, 1)), the contracted set is the set
    of time-t points of all enumerated geodesics from members of A to x; the
    report records its measure.  Zero mass at some t is a discreteness
    diagnostic: on a coarse grid the image can fall between charged points.

    Raises when A is empty or carries no mass.
    """
    idx = sorted({space.index(p) for p in A})
    if not idx:
        raise ValueError("contraction of an empty set")
    weights = measure.exact if measure is not None else space.ref_weights_exact
    if sum((weights[i] for i in idx), Fraction(0)) == 0:
        raise ValueError("set A carries no mass")
    ix = space.index(x)
    times = [float(t) for t in t_grid]
    if any(not 0 <= t < 1 for t in times):
        raise ValueError("t grid must lie within [0, 1)")

    truncated = False
    geos_per_a = []
    for a in idx:
        gs = enumerate_geodesics(space, a, ix, max_count=max_count)
        truncated = truncated or gs.truncated
        geos_per_a.append(gs)

    rows = []
    for t in times:
        image = set()
        for gs in geos_per_a:
            for path in gs:
                image.add(evaluate(path, t))
        pts = tuple(sorted(image))
        mass = sum((weights[i] for i in pts), Fraction(0))
        rows.append((t, pts, mass))
    return ContractionReport(tuple(idx), ix, tuple(rows), truncated)


# ---------------------------------------------------------------------------
# scaling of the empty-shell set under contraction
# ---------------------------------------------------------------------------

def _merge_intervals(intervals):
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if out and lo <= out[-1][1] + 1e-15:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def _intersect_intervals(a, b):
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if hi > lo:
                out.append((lo, hi))
    return _merge_intervals(out)


def _subtract_intervals(a, b):
    out = []
    for lo, hi in a:
        pieces = [(lo, hi)]
        for blo, bhi in b:
            nxt = []
            for plo, phi in pieces:
                if bhi <= plo or blo >= phi:
                    nxt.append((plo, phi))
                    continue
                if plo < blo:
                    nxt.append((plo, blo))
                if bhi < phi:
                    nxt.append((bhi, phi))
            pieces = nxt
        out.extend(pieces)
    return _merge_intervals(out)


def _length(intervals) -> float:
    return float(sum(hi - lo for lo, hi in intervals))


@dataclass(frozen=True)
class ScalingReport:
    """Scaling behavior of the empty-shell radius set near a far point.

    ``empty_set`` is the union of distance bins in (l - r0, l), l = d(x, y),
    whose slice carries no mass inside B(y, r0).  For each t the report
    measures how much of (1/t) * empty_set escapes the set again inside the
    window; staying within two bin widths is recorded as consistent.
    """

    x: int
    y: int
    r0: float
    l: float
    bin_width: float
    empty_set: tuple[tuple[float, float], ...]
    rows: tuple[tuple[float, float, bool], ...]  # (t, leak_length, consistent)

    @property
    def all_consistent(self) -> bool:
        return all(ok for _, _, ok in self.rows)


def contraction_zero_set_check(space: FiniteMetricMeasureSpace, x, y,
                               r0: float, t_grid, bin_width: float,
                               measure: DiscreteMeasure | None = None) -> ScalingReport:
    """Check that the set of empty shells is essentially scaling-invariant.

    Around x, consider radii r in the window (l - r0, l) with l = d(x, y)
    whose distance shell carries no mass inside B(y, r0); call that set E
    (computed here as a union of bins).  For measures that contract
    non-degenerately toward x, dilating E by 1/t (t in (0, 1]) cannot cover
    new radii of the window beyond discretization effects, so the measured
    leak length of ((1/t) E) ∩ window minus E should stay at bin scale.
    Verdict per t: leak <= 2 * bin_width.
    """
    ix, iy = space.index(x), space.index(y)
    l = float(space.dist[ix, iy])
    if not 0 < r0 < l:
        raise ValueError(f"need 0 < r0 < d(x, y) = {l}, got r0 = {r0}")
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    times = [float(t) for t in t_grid]
    if any(not 0 < t <= 1 for t in times):
        raise ValueError("t grid must lie within (0, 1]")

    weights = measure.exact if measure is not None else space.ref_weights_exact
    dline = space.dist[ix]
    ball_y = set(int(i) for i in space.ball(iy, r0))

    lo_w, hi_w = l - r0, l
    nbins = max(1, int(np.ceil(r0 / bin_width - 1e-12)))
    empty = []
    for k in range(nbins):
        blo = lo_w + k * bin_width
        bhi = min(lo_w + (k + 1) * bin_width, hi_w)
        mass = Fraction(0)
        for i in range(space.n):
            if blo <= dline[i] < bhi and i in ball_y:
                mass += weights[i]
        if mass == 0:
            empty.append((blo, bhi))
    empty = _merge_intervals(empty)
    window = [(lo_w, hi_w)]

    rows = []
    for t in times:
        scaled = [(lo / t, hi / t) for lo, hi in empty]
        leak = _length(_subtract_intervals(_intersect_intervals(scaled, window), empty))
        rows.append((t, leak, leak <= 2 * bin_width + 1e-12))
    return ScalingReport(ix, iy, r0, l, bin_width, tuple(empty), tuple(rows))
