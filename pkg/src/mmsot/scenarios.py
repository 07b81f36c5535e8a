"""Deterministic builders for the study spaces and transport gadgets.

Every builder is a pure function of its parameters: same inputs, same space,
byte-identical serialization.  Reference weights are exact rationals
throughout (length shares on one-dimensional pieces, Beta-integral weights on
the fan, cell areas on the cusp grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .rationals import as_fraction, format_ratio
from .spaces import DiscreteMeasure, FiniteMetricMeasureSpace, restrict_and_normalize

__all__ = [
    "ScenarioSpec",
    "build_scenario",
    "build_interval",
    "build_circle",
    "build_polyline",
    "build_tripod",
    "build_fan",
    "build_cusp",
    "GadgetInstance",
    "build_gadget",
    "GADGET_NAMES",
    "arclength_point",
    "tripod_point",
    "cusp_point",
    "fan_atom",
    "fan_atom_ids_by_radius",
    "fan_segment_ids",
    "fan_bernoulli_measure",
    "quantile_subset",
]

SCENARIO_NAMES = ("interval", "circle", "polyline", "tripod", "fan", "cusp")
GADGET_NAMES = ("two_branch_segments", "equidistant_diracs", "equidistant_balls")

MAX_FAN_DEPTH = 14


@dataclass(frozen=True)
class ScenarioSpec:
    """Name plus parameters; the seed is reserved for randomized nets.

    None of the current builders draw random numbers, so the seed only
    participates in the manifest.
    """

    name: str
    params: tuple[tuple[str, object], ...] = ()
    seed: int = 0

    @classmethod
    def of(cls, name: str, seed: int = 0, **params) -> "ScenarioSpec":
        if name not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {name!r}; "
                             f"choose from {', '.join(SCENARIO_NAMES)}")
        return cls(name, tuple(sorted(params.items())), seed)

    def as_dict(self) -> dict:
        return dict(self.params)


def _manifest(name: str, params: dict, space: FiniteMetricMeasureSpace,
              notes: str = "") -> dict:
    return {
        "scenario": name,
        "parameters": {k: (str(v) if isinstance(v, Fraction) else v)
                       for k, v in sorted(params.items())},
        "points": space.n,
        "h": space.h,
        "total_reference_mass": format_ratio(space.total_mass_exact()),
        "notes": notes,
    }


def _subdivide(length, h):
    """Exact subdivision count and step: k = ceil(L/h), step = L/k."""
    L = as_fraction(length)
    hh = as_fraction(h)
    if not (L > 0 and hh > 0):
        raise ValueError("length and step must be positive")
    k = int(-(-L // hh))
    return k, L / k


# ---------------------------------------------------------------------------
# one-dimensional pieces
# ---------------------------------------------------------------------------

def build_interval(length=1.0, h=Fraction(1, 16)) -> FiniteMetricMeasureSpace:
    """Uniform grid on [0, length] with Lebesgue-share reference weights.

    Endpoint weights are half a step, interior weights a full step, so the
    total reference mass equals ``length`` exactly.
    """
    k, step = _subdivide(length, h)
    ids = [f"s{i}" for i in range(k + 1)]
    coords = [i * step for i in range(k + 1)]
    cf = np.array([float(c) for c in coords])
    dist = np.abs(cf[:, None] - cf[None, :])
    weights = [step if 0 < i < k else step / 2 for i in range(k + 1)]
    labels = [{"s": float(c)} for c in coords]
    adjacency = [(i, i + 1) for i in range(k)]
    return FiniteMetricMeasureSpace(ids, dist, weights, labels=labels,
                                    h=float(step), adjacency=adjacency)


def build_circle(circumference=1.0, h=Fraction(1, 16)) -> FiniteMetricMeasureSpace:
    """Ring grid with the arc-length metric; every point weighs one step."""
    k, step = _subdivide(circumference, h)
    if k < 3:
        raise ValueError("circle needs at least 3 points; decrease h")
    ids = [f"c{i}" for i in range(k)]
    idx = np.arange(k)
    hops = np.abs(idx[:, None] - idx[None, :])
    hops = np.minimum(hops, k - hops)
    dist = hops * float(step)
    weights = [step] * k
    labels = [{"s": float(i * step)} for i in range(k)]
    adjacency = [(i, (i + 1) % k) for i in range(k)]
    return FiniteMetricMeasureSpace(ids, dist, weights, labels=labels,
                                    h=float(step), adjacency=adjacency)


def build_polyline(lengths=(1.0, 1.0), h=Fraction(1, 16),
                   turn_degrees=25.0) -> FiniteMetricMeasureSpace:
    """A chain of straight segments with the intrinsic (arclength) metric.

    Metrically this is an interval of the total length; the planar zigzag
    coordinates (alternating turns) are carried in the labels for plotting.
    """
    if not lengths:
        raise ValueError("polyline needs at least one segment")
    arcs = [Fraction(0)]
    xy = [(0.0, 0.0)]
    heading = 0.0
    steps = []
    for seg_idx, L in enumerate(lengths):
        k, step = _subdivide(L, h)
        steps.append(step)
        for i in range(1, k + 1):
            arcs.append(arcs[-1] + step)
            px, py = xy[-1]
            xy.append((px + float(step) * math.cos(heading),
                       py + float(step) * math.sin(heading)))
        heading += math.radians(turn_degrees) * (1 if seg_idx % 2 == 0 else -1)
    n = len(arcs)
    ids = [f"p{i}" for i in range(n)]
    af = np.array([float(a) for a in arcs])
    dist = np.abs(af[:, None] - af[None, :])
    weights = [Fraction(0)] * n
    pos = 0
    for step, L in zip(steps, lengths):
        k, _ = _subdivide(L, h)
        for i in range(pos, pos + k):
            weights[i] += step / 2
            weights[i + 1] += step / 2
        pos += k
    labels = [{"s": float(a), "xy": p} for a, p in zip(arcs, xy)]
    adjacency = [(i, i + 1) for i in range(n - 1)]
    return FiniteMetricMeasureSpace(ids, dist, weights, labels=labels,
                                    h=float(max(steps)), adjacency=adjacency)


def build_tripod(leg_lengths=(1.0, 1.0, 1.0),
                 h=Fraction(1, 4)) -> FiniteMetricMeasureSpace:
    """Three legs glued at a hub; the metric adds arclengths across the hub.

    Point ids are "hub" and "A1".."Ak" outward along each leg (similarly B,
    C); the last point of each leg is its leaf.
    """
    if len(leg_lengths) != 3:
        raise ValueError("a tripod has exactly three legs")
    names = ("A", "B", "C")
    ids = ["hub"]
    leg_of = [None]
    svals: list[Fraction] = [Fraction(0)]
    weights: list[Fraction] = [Fraction(0)]
    labels: list[dict] = [{"leg": "hub", "s": 0.0}]
    adjacency: list[tuple[int, int]] = []
    for name, L in zip(names, leg_lengths):
        k, step = _subdivide(L, h)
        weights[0] += step / 2
        prev = 0
        for i in range(1, k + 1):
            ids.append(f"{name}{i}")
            leg_of.append(name)
            svals.append(i * step)
            weights.append(step if i < k else step / 2)
            labels.append({"leg": name, "s": float(i * step)})
            adjacency.append((prev, len(ids) - 1))
            prev = len(ids) - 1
    n = len(ids)
    s = np.array([float(v) for v in svals])
    same_leg = np.zeros((n, n), dtype=bool)
    for name in names:
        mask = np.array([lg == name for lg in leg_of])
        same_leg |= mask[:, None] & mask[None, :]
    dist = s[:, None] + s[None, :]
    through = np.abs(s[:, None] - s[None, :])
    dist[same_leg] = through[same_leg]
    np.fill_diagonal(dist, 0.0)
    dist[0, :] = s
    dist[:, 0] = s
    return FiniteMetricMeasureSpace(ids, dist, weights, labels=labels,
                                    h=float(as_fraction(h)), adjacency=adjacency)


# ---------------------------------------------------------------------------
# fan
# ---------------------------------------------------------------------------

def build_fan(depth=12, segment_h=Fraction(1, 16)) -> FiniteMetricMeasureSpace:
    """A segment [-1, 0] joined at the origin to a fan of binary-coded atoms.

    Each bit string b of the given depth yields one atom with radius
    sum(b_i 2^-i) and angle mean(b) - 1/2; the all-zero string has radius 0
    and is merged with the segment endpoint into the single point "origin".
    Fan-to-fan distances are planar chords inside the (convex) sector,
    segment-to-fan distances are radius minus signed coordinate, which is the
    shortest path through the origin.

    Reference weights: length shares on the segment (total 1) and the exact
    t-averaged Bernoulli weights k!(depth-k)!/(depth+1)! on the atoms
    (total 1), k the number of ones.
    """
    n = int(depth)
    if not 1 <= n <= MAX_FAN_DEPTH:
        raise ValueError(f"depth must be within 1..{MAX_FAN_DEPTH}")
    nseg, step = _subdivide(1, segment_h)
    natoms = 2 ** n
    total = nseg + natoms  # segment points 0..nseg-1, then origin + atoms

    ids = [f"g{i}" for i in range(nseg)]
    svals = [-1 + i * step for i in range(nseg)]
    labels: list[dict] = [{"s": float(v)} for v in svals]
    weights: list[Fraction] = [step / 2 if i == 0 else step for i in range(nseg)]

    fact = [math.factorial(i) for i in range(n + 2)]
    for v in range(natoms):
        bits = format(v, f"0{n}b")
        k = bits.count("1")
        radius = Fraction(v, natoms)
        mean = Fraction(k, n)
        beta_weight = Fraction(fact[k] * fact[n - k], fact[n + 1])
        if v == 0:
            ids.append("origin")
            weights.append(step / 2 + beta_weight)
            labels.append({"s": 0.0, "bits": bits, "radius": 0.0, "mean": 0.0,
                           "radius_exact": radius, "ones": 0})
        else:
            ids.append(f"f{bits}")
            weights.append(beta_weight)
            labels.append({"bits": bits, "radius": float(radius),
                           "mean": float(mean), "radius_exact": radius,
                           "ones": k})

    s = np.array([float(v) for v in svals])
    t = np.arange(natoms, dtype=float) / natoms
    ones = np.array([int(v).bit_count() for v in range(natoms)], dtype=float)
    phi = ones / n - 0.5

    dist = np.zeros((total, total))
    dist[:nseg, :nseg] = np.abs(s[:, None] - s[None, :])
    dist[:nseg, nseg:] = t[None, :] - s[:, None]
    dist[nseg:, :nseg] = dist[:nseg, nseg:].T
    chord_sq = (t[:, None] ** 2 + t[None, :] ** 2
                - 2.0 * np.outer(t, t) * np.cos(phi[:, None] - phi[None, :]))
    np.fill_diagonal(chord_sq, 0.0)
    dist[nseg:, nseg:] = np.sqrt(np.maximum(chord_sq, 0.0))

    check = "auto" if total <= 2000 else "none"
    return FiniteMetricMeasureSpace(ids, dist, weights, labels=labels,
                                    h=float(step), check=check)


def fan_atom(space: FiniteMetricMeasureSpace, bits: str) -> str:
    """Point id of the atom with the given bit string ("000..0" is the origin)."""
    if set(bits) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return "origin" if set(bits) == {"0"} else f"f{bits}"


def fan_atom_ids_by_radius(space: FiniteMetricMeasureSpace,
                           include_origin: bool = False) -> list[str]:
    """Fan atom ids sorted by exact radius, ascending."""
    out = []
    for pid, lab in zip(space.point_ids, space.labels):
        if "bits" in lab and (include_origin or pid != "origin"):
            out.append((lab["radius_exact"], pid))
    out.sort()
    return [pid for _, pid in out]


def fan_segment_ids(space: FiniteMetricMeasureSpace) -> list[str]:
    """Segment point ids sorted by coordinate (origin excluded)."""
    out = [(lab["s"], pid) for pid, lab in zip(space.point_ids, space.labels)
           if "s" in lab and "bits" not in lab]
    out.sort()
    return [pid for _, pid in out]


def fan_bernoulli_measure(space: FiniteMetricMeasureSpace, t) -> DiscreteMeasure:
    """The depth-n product measure with success probability t, on fan atoms.

    Atom with k ones weighs t^k (1-t)^(n-k); exact when t is rational.
    """
    tf = as_fraction(t)
    if not 0 <= tf <= 1:
        raise ValueError("t must lie in [0, 1]")
    depth = None
    for lab in space.labels:
        if "bits" in lab:
            depth = len(lab["bits"])
            break
    if depth is None:
        raise ValueError("space has no fan atoms")
    w = [Fraction(0)] * space.n
    for i, lab in enumerate(space.labels):
        if "bits" in lab:
            k = lab["ones"]
            w[i] = tf ** k * (1 - tf) ** (depth - k)
    return DiscreteMeasure(space, w)


def quantile_subset(items: list, count: int) -> list:
    """Evenly spread ``count`` entries of a list (deterministic mid-quantiles)."""
    n = len(items)
    if count > n:
        raise ValueError(f"cannot pick {count} out of {n}")
    positions = [min(int((k + 0.5) * n / count), n - 1) for k in range(count)]
    if len(set(positions)) != count:
        raise ValueError("quantile picks collided; list too short")
    return [items[p] for p in positions]


# ---------------------------------------------------------------------------
# cusp
# ---------------------------------------------------------------------------

def build_cusp(grid_h=Fraction(1, 32)) -> FiniteMetricMeasureSpace:
    """Grid approximation of {|x| <= 1/2, |y| <= x^2} in the sup-norm metric.

    Grid points at pitch ``grid_h``; 8-neighbor edges, each of sup-norm
    length ``grid_h``; the metric is the shortest-path (intrinsic) distance.
    Reference weights are one grid cell area per point.
    """
    hh = as_fraction(grid_h)
    if hh > Fraction(1, 16):
        raise ValueError("grid step must be at most 1/16")
    kmax = int(Fraction(1, 2) / hh)
    ids = []
    coords = []
    index = {}
    for i in range(-kmax, kmax + 1):
        jmax = int(i * i * hh)
        for j in range(-jmax, jmax + 1):
            index[(i, j)] = len(ids)
            ids.append(f"p{i}_{j}")
            coords.append((i, j))
    n = len(ids)

    rows, cols = [], []
    adjacency = []
    for (i, j), a in index.items():
        for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
            b = index.get((i + di, j + dj))
            if b is not None:
                rows.append(a)
                cols.append(b)
                adjacency.append((a, b))
    w = np.full(2 * len(rows), float(hh))
    sparse = csr_matrix((w, (rows + cols, cols + rows)), shape=(n, n))
    ncomp, _ = connected_components(sparse, directed=False)
    if ncomp != 1:
        raise ValueError("cusp grid is disconnected; decrease the step")
    dist = dijkstra(sparse, directed=False)

    weights = [hh * hh] * n
    labels = [{"xy": (float(i * hh), float(j * hh)), "i": i, "j": j}
              for i, j in coords]
    return FiniteMetricMeasureSpace(ids, dist, weights, labels=labels,
                                    h=float(hh), adjacency=adjacency,
                                    check="auto" if n <= 400 else "none")


def cusp_point(space: FiniteMetricMeasureSpace, x: float, y: float) -> str:
    """Id of the grid point nearest to planar coordinates (x, y)."""
    best, best_d = None, np.inf
    for pid, lab in zip(space.point_ids, space.labels):
        px, py = lab["xy"]
        d = max(abs(px - x), abs(py - y))
        if d < best_d:
            best, best_d = pid, d
    return best


# ---------------------------------------------------------------------------
# generic locators
# ---------------------------------------------------------------------------

def arclength_point(space: FiniteMetricMeasureSpace, s: float) -> str:
    """Id of the point whose arclength label is closest to s."""
    best, best_d = None, np.inf
    for pid, lab in zip(space.point_ids, space.labels or []):
        if "s" in lab and "bits" not in lab:
            d = abs(lab["s"] - s)
            if d < best_d:
                best, best_d = pid, d
    if best is None:
        raise ValueError("space has no arclength labels")
    return best


def tripod_point(space: FiniteMetricMeasureSpace, leg: str, s: float) -> str:
    """Nearest tripod point on the given leg ("A"/"B"/"C"; s = 0 is the hub)."""
    if s == 0 or leg == "hub":
        return "hub"
    best, best_d = None, np.inf
    for pid, lab in zip(space.point_ids, space.labels):
        if lab.get("leg") == leg:
            d = abs(lab["s"] - s)
            if d < best_d:
                best, best_d = pid, d
    if best is None:
        raise ValueError(f"no points on leg {leg!r}")
    return best


# ---------------------------------------------------------------------------
# scenario dispatch
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "interval": {"length": 1.0, "h": Fraction(1, 16)},
    "circle": {"circumference": 1.0, "h": Fraction(1, 16)},
    "polyline": {"lengths": (1.0, 1.0), "h": Fraction(1, 16)},
    "tripod": {"leg_lengths": (1.0, 1.0, 1.0), "h": Fraction(1, 4)},
    "fan": {"depth": 12, "segment_h": Fraction(1, 16)},
    "cusp": {"grid_h": Fraction(1, 32)},
}

_BUILDERS = {
    "interval": build_interval,
    "circle": build_circle,
    "polyline": build_polyline,
    "tripod": build_tripod,
    "fan": build_fan,
    "cusp": build_cusp,
}

_NOTES = {
    "interval": "uniform grid on a segment, Lebesgue-share weights",
    "circle": "ring grid, arc-length metric",
    "polyline": "chain of segments, intrinsic metric",
    "tripod": "three legs glued at a hub",
    "fan": "segment joined to a binary-coded planar fan at the origin",
    "cusp": "sup-norm grid on a quadratic-cusp region",
}


def build_scenario(spec: ScenarioSpec):
    """Build a named scenario; returns (space, manifest dict)."""
    if spec.name not in _BUILDERS:
        raise ValueError(f"unknown scenario {spec.name!r}; "
                         f"choose from {', '.join(SCENARIO_NAMES)}")
    params = dict(_DEFAULTS[spec.name])
    given = spec.as_dict()
    unknown = set(given) - set(params)
    if unknown:
        raise ValueError(f"unknown parameter(s) for {spec.name}: "
                         f"{', '.join(sorted(unknown))}")
    params.update(given)
    space = _BUILDERS[spec.name](**params)
    manifest = _manifest(spec.name, params, space, notes=_NOTES[spec.name])
    manifest["seed"] = spec.seed
    return space, manifest


# ---------------------------------------------------------------------------
# transport gadgets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GadgetInstance:
    """A space with a source/target measure pair and the phenomenon it shows."""

    name: str
    space: FiniteMetricMeasureSpace
    mu0: DiscreteMeasure
    mu1: DiscreteMeasure
    expected_phenomenon: str
    description: str = field(default="", compare=False)


def _leg_segment(space, leg: str, s_max: float) -> list[str]:
    out = [pid for pid, lab in zip(space.point_ids, space.labels)
           if lab.get("leg") == leg and 0 < lab["s"] <= s_max + 1e-12]
    if not out:
        raise ValueError(f"no points on leg {leg} within (0, {s_max}]")
    return out


def build_gadget(name: str) -> GadgetInstance:
    """Construct one of the named transport gadgets on a unit tripod.

    * "two_branch_segments": mass on one leg must spread onto equal-length
      initial segments of the other two legs; no optimal plan is a map.
    * "equidistant_diracs": a ball on one leg against two Dirac targets at
      equal distance from every source; all couplings cost the same, so the
      product plan is optimal and the optimal vertex is not unique.
    * "equidistant_balls": sources on one leg against the normalized
      reference measure on two disjoint balls centered at equidistant
      points; no optimal vertex is a map.
    """
    if name == "two_branch_segments":
        space = build_tripod((1.0, 1.0, 1.0), Fraction(1, 8))
        mu0 = restrict_and_normalize(space, _leg_segment(space, "C", 0.5))
        half_a = restrict_and_normalize(space, _leg_segment(space, "A", 0.5))
        half_b = restrict_and_normalize(space, _leg_segment(space, "B", 0.5))
        mu1 = DiscreteMeasure.mixture([(half_a, Fraction(1, 2)),
                                       (half_b, Fraction(1, 2))])
        return GadgetInstance(
            name, space, mu0, mu1, "no-monge-map",
            "leg-C segment pushed onto two equal branch segments")
    if name == "equidistant_diracs":
        space = build_tripod((1.0, 1.0, 1.0), Fraction(1, 4))
        ball = space.ball(tripod_point(space, "C", 0.5), 0.25)
        mu0 = restrict_and_normalize(space, [int(i) for i in ball])
        mu1 = DiscreteMeasure.mixture([
            (DiscreteMeasure.dirac(space, tripod_point(space, "A", 0.5)),
             Fraction(1, 2)),
            (DiscreteMeasure.dirac(space, tripod_point(space, "B", 0.5)),
             Fraction(1, 2)),
        ])
        return GadgetInstance(
            name, space, mu0, mu1, "product-plan-optimal",
            "ball on leg C against two equidistant Dirac targets")
    if name == "equidistant_balls":
        space = build_tripod((1.0, 1.0, 1.0), Fraction(1, 4))
        mu0 = restrict_and_normalize(space, _leg_segment(space, "C", 0.5))
        ball_a = [int(i) for i in space.ball(tripod_point(space, "A", 0.5), 0.25)]
        ball_b = [int(i) for i in space.ball(tripod_point(space, "B", 0.5), 0.25)]
        mu1 = restrict_and_normalize(space, ball_a + ball_b)
        return GadgetInstance(
            name, space, mu0, mu1, "no-map-to-ac-target",
            "leg-C segment against the reference measure on two disjoint balls")
    raise ValueError(f"unknown gadget {name!r}; choose from "
                     f"{', '.join(GADGET_NAMES)}")
