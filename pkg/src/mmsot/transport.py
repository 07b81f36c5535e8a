"""Quadratic optimal transport between discrete measures, in exact arithmetic.

The solver is a transportation simplex with Bland's rule.  A float pass picks
the final basis quickly; the basic solution, dual potentials and reduced costs
are then re-derived in exact rational arithmetic from that basis, and exact
pivoting continues if exactness disagrees.  Every returned plan therefore
carries an exact optimality certificate (dual potentials with complementary
slackness and a nonnegative margin), which is what makes tie phenomena
(equidistant targets, constant-cost polytopes) certifiable rather than
numerical accidents.

Squared distance is the only cost used here; ``plan.cost_exact`` is the
squared Wasserstein value.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geodesics import GeodesicPath, enumerate_geodesics, evaluate
from .rationals import as_fraction
from .spaces import DiscreteMeasure, FiniteMetricMeasureSpace

__all__ = [
    "InfeasibleMarginals",
    "TransportPlan",
    "DynamicalPlan",
    "MonotonicityCertificate",
    "MonotonicityWitness",
    "VertexEnumeration",
    "solve_w2",
    "product_plan",
    "is_induced_by_map",
    "check_c_monotone",
    "enumerate_optimal_vertices",
    "lift_to_dynamical",
    "split_plan",
]

MARGINAL_TOL = 1e-10
MAP_MASS_TOL = 1e-12
WITNESS_DECREASE = 1e-12
CERT_MARGIN_TOL = 1e-9


class InfeasibleMarginals(ValueError):
    """Marginals of different total mass, or measures on different spaces."""


# ---------------------------------------------------------------------------
# transportation simplex (generic over float / Fraction arithmetic)
# ---------------------------------------------------------------------------

def _northwest_corner(a, b):
    """Initial basic solution; returns (flows dict, basis list of cells)."""
    m, n = len(a), len(b)
    a = list(a)
    b = list(b)
    x = {}
    basis = []
    i = j = 0
    while True:
        t = a[i] if a[i] < b[j] else b[j]
        x[(i, j)] = t
        basis.append((i, j))
        a[i] -= t
        b[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if a[i] == 0 and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1
    return x, basis


def _tree_duals(cost, basis, m, n, zero):
    """Potentials u, v with u_i + v_j = c_ij on the basis tree (u_0 = 0)."""
    by_row = [[] for _ in range(m)]
    by_col = [[] for _ in range(n)]
    for i, j in basis:
        by_row[i].append(j)
        by_col[j].append(i)
    u: list = [None] * m
    v: list = [None] * n
    u[0] = zero
    stack = [(True, 0)]
    while stack:
        is_row, k = stack.pop()
        if is_row:
            for j in by_row[k]:
                if v[j] is None:
                    v[j] = cost[k][j] - u[k]
                    stack.append((False, j))
        else:
            for i in by_col[k]:
                if u[i] is None:
                    u[i] = cost[i][k] - v[k]
                    stack.append((True, i))
    if any(ui is None for ui in u) or any(vj is None for vj in v):
        raise RuntimeError("basis is not a spanning tree")
    return u, v


def _tree_cycle(basis, entering):
    """Cells of the unique cycle created by adding ``entering`` to the tree.

    Returned in cycle order starting at the entering cell, so cells at odd
    positions are the '-' cells of the pivot.
    """
    i0, j0 = entering
    adj = defaultdict(list)
    for cell in basis:
        i, j = cell
        adj[("r", i)].append((("c", j), cell))
        adj[("c", j)].append((("r", i), cell))
    start, goal = ("r", i0), ("c", j0)
    prev = {start: None}
    stack = [start]
    while stack:
        node = stack.pop()
        if node == goal:
            break
        for nxt, cell in adj[node]:
            if nxt not in prev:
                prev[nxt] = (node, cell)
                stack.append(nxt)
    path = []
    node = goal
    while prev[node] is not None:
        node, cell = prev[node]
        path.append(cell)
    # path now runs goal -> start; cycle order: entering, then back to start.
    return [entering] + path


def _transport_simplex(cost, a, b, eps, start=None, max_iter=200000):
    """Min-cost flow on the full bipartite support via simplex, Bland's rule.

    All inputs share one arithmetic type (float or Fraction).  ``eps`` is the
    entering threshold (0 for exact arithmetic).  ``start`` optionally resumes
    from (flows, basis).  Returns (flows, basis, u, v).
    """
    m, n = len(a), len(b)
    if start is None:
        x, basis = _northwest_corner(a, b)
    else:
        x, basis = {k: v for k, v in start[0].items()}, list(start[1])
    basis_set = set(basis)
    zero = a[0] * 0

    for _ in range(max_iter):
        u, v = _tree_duals(cost, basis, m, n, zero)
        entering = None
        for i in range(m):
            ui = u[i]
            row = cost[i]
            for j in range(n):
                if (i, j) not in basis_set and row[j] - ui - v[j] < -eps:
                    entering = (i, j)
                    break
            if entering is not None:
                break
        if entering is None:
            return x, basis, u, v

        cycle = _tree_cycle(basis, entering)
        minus = cycle[1::2]
        theta = min(x[c] for c in minus)
        leaving = min(c for c in minus if x[c] == theta)

        x[entering] = x.get(entering, zero)
        for k, cell in enumerate(cycle):
            if k % 2 == 0:
                x[cell] = x[cell] + theta
            else:
                x[cell] = x[cell] - theta
                if x[cell] < zero:  # float round-off only
                    x[cell] = zero
        del x[leaving]
        basis_set.remove(leaving)
        basis_set.add(entering)
        basis[basis.index(leaving)] = entering
    raise RuntimeError("transportation simplex did not terminate (cycling?)")


def _tree_flows(basis, a, b):
    """Exact basic solution for a given basis tree (may be infeasible)."""
    arow = list(a)
    bcol = list(b)
    adj: dict = defaultdict(set)
    for cell in basis:
        i, j = cell
        adj[("r", i)].add(cell)
        adj[("c", j)].add(cell)
    x = {}
    stack = [nd for nd, cells in adj.items() if len(cells) == 1]
    while stack:
        nd = stack.pop()
        cells = adj[nd]
        if not cells:
            continue
        cell = cells.pop()
        i, j = cell
        val = arow[i] if nd[0] == "r" else bcol[j]
        x[cell] = val
        arow[i] -= val
        bcol[j] -= val
        other = ("c", j) if nd[0] == "r" else ("r", i)
        adj[other].discard(cell)
        if len(adj[other]) == 1:
            stack.append(other)
    if len(x) != len(basis):
        raise RuntimeError("basis is not a spanning tree")
    return x


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------

class TransportPlan:
    """A coupling between two discrete measures, stored exactly on supports.

    ``coupling_exact[r][c]`` is the mass moved from source support point
    ``row_points[r]`` to target support point ``col_points[c]``.  When the
    plan came from the solver it also carries exact dual potentials and the
    exact reduced-cost margin (>= 0 certifies optimality).
    """

    def __init__(self, space: FiniteMetricMeasureSpace,
                 source: DiscreteMeasure, target: DiscreteMeasure,
                 row_points, col_points, coupling_exact,
                 duals=None, margin_exact: Fraction | None = None,
                 basis=None):
        self.space = space
        self.source = source
        self.target = target
        self.row_points = tuple(int(p) for p in row_points)
        self.col_points = tuple(int(p) for p in col_points)
        self.coupling_exact = tuple(tuple(as_fraction(x) for x in row)
                                    for row in coupling_exact)
        self.duals = duals
        self.margin_exact = margin_exact
        self.basis = tuple(basis) if basis is not None else None
        self._cost_exact: Fraction | None = None
        self._validate()

    def _validate(self):
        m, n = len(self.row_points), len(self.col_points)
        if len(self.coupling_exact) != m or any(len(r) != n for r in self.coupling_exact):
            raise ValueError("coupling shape does not match supports")
        if any(x < 0 for row in self.coupling_exact for x in row):
            raise ValueError("coupling has negative entries")
        for r, p in enumerate(self.row_points):
            got = sum(self.coupling_exact[r], Fraction(0))
            want = self.source.exact[p]
            if got != want and abs(float(got - want)) > MARGINAL_TOL:
                raise ValueError(
                    f"first marginal mismatch at {self.space.point_ids[p]!r}: "
                    f"{float(got)} vs {float(want)}")
        for c, q in enumerate(self.col_points):
            got = sum((row[c] for row in self.coupling_exact), Fraction(0))
            want = self.target.exact[q]
            if got != want and abs(float(got - want)) > MARGINAL_TOL:
                raise ValueError(
                    f"second marginal mismatch at {self.space.point_ids[q]!r}: "
                    f"{float(got)} vs {float(want)}")

    # -- derived views ------------------------------------------------------

    @property
    def coupling(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.coupling_exact])

    @property
    def cost_exact(self) -> Fraction:
        """Exact squared-distance transport cost of the plan."""
        if self._cost_exact is None:
            d = self.space.dist
            total = Fraction(0)
            for r, p in enumerate(self.row_points):
                for c, q in enumerate(self.col_points):
                    mass = self.coupling_exact[r][c]
                    if mass:
                        total += mass * as_fraction(float(d[p, q])) ** 2
            self._cost_exact = total
        return self._cost_exact

    @property
    def cost(self) -> float:
        return float(self.cost_exact)

    @property
    def w2(self) -> float:
        return float(np.sqrt(self.cost))

    @property
    def total_mass_exact(self) -> Fraction:
        return sum((x for row in self.coupling_exact for x in row), Fraction(0))

    def pairs(self):
        """Positive entries as (source point, target point, exact mass)."""
        out = []
        for r, p in enumerate(self.row_points):
            for c, q in enumerate(self.col_points):
                if self.coupling_exact[r][c] > 0:
                    out.append((p, q, self.coupling_exact[r][c]))
        return out

    def support_pairs(self):
        return [(p, q) for p, q, _ in self.pairs()]

    def marginal_first(self) -> DiscreteMeasure:
        w = [Fraction(0)] * self.space.n
        for p, _, mass in self.pairs():
            w[p] += mass
        return DiscreteMeasure(self.space, w,
                               probability=(sum(w, Fraction(0)) == 1))

    def marginal_second(self) -> DiscreteMeasure:
        w = [Fraction(0)] * self.space.n
        for _, q, mass in self.pairs():
            w[q] += mass
        return DiscreteMeasure(self.space, w,
                               probability=(sum(w, Fraction(0)) == 1))

    @property
    def is_certified_optimal(self) -> bool:
        return self.margin_exact is not None and self.margin_exact >= 0

    def same_coupling(self, other: "TransportPlan") -> bool:
        """Exact equality of couplings as measures on the product."""
        mine = {(p, q): x for p, q, x in self.pairs()}
        theirs = {(p, q): x for p, q, x in other.pairs()}
        return mine == theirs

    def __repr__(self) -> str:
        cert = "certified" if self.is_certified_optimal else "uncertified"
        return (f"TransportPlan({len(self.row_points)}x{len(self.col_points)}, "
                f"cost={self.cost:.6g}, {cert})")


def _plan_from_flows(space, source, target, rows, cols, flows,
                     duals=None, margin=None, basis=None):
    mat = [[Fraction(0)] * len(cols) for _ in rows]
    for (r, c), val in flows.items():
        mat[r][c] = as_fraction(val)
    return TransportPlan(space, source, target, rows, cols, mat,
                         duals=duals, margin_exact=margin, basis=basis)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def _supports_and_masses(mu0: DiscreteMeasure, mu1: DiscreteMeasure):
    if mu0.space is not mu1.space:
        raise InfeasibleMarginals("measures live on different spaces")
    rows = list(mu0.support())
    cols = list(mu1.support())
    if not rows or not cols:
        raise InfeasibleMarginals("a marginal is the zero measure")
    a = [mu0.exact[p] for p in rows]
    b = [mu1.exact[q] for q in cols]
    ta, tb = sum(a, Fraction(0)), sum(b, Fraction(0))
    if ta != tb:
        if abs(float(ta - tb)) > DiscreteMeasure.MASS_TOL:
            raise InfeasibleMarginals(
                f"total masses differ: {float(ta)} vs {float(tb)}")
        # float-built masses may be off by < 1e-12; rescale the target side
        # exactly so the LP is balanced.
        b = [w * ta / tb for w in b]
    return rows, cols, a, b


def _exact_cost_matrix(space, rows, cols):
    d = space.dist
    return [[as_fraction(float(d[p, q])) ** 2 for q in cols] for p in rows]


def solve_w2(space: FiniteMetricMeasureSpace,
             mu0: DiscreteMeasure, mu1: DiscreteMeasure):
    """Optimal quadratic-cost coupling and the W2 value.

    Returns (plan, w2) where ``plan`` is a vertex of the transportation
    polytope with exact dual potentials; ``plan.cost_exact`` is the exact
    squared Wasserstein distance and ``w2 = sqrt(cost)`` as a float.
    """
    rows, cols, a, b = _supports_and_masses(mu0, mu1)
    m, n = len(rows), len(cols)
    d = space.dist

    cost_f = [[float(d[p, q]) ** 2 for q in cols] for p in rows]
    scale = max(max(row) for row in cost_f) + 1.0
    _, basis, _, _ = _transport_simplex(
        cost_f, [float(x) for x in a], [float(x) for x in b],
        eps=1e-11 * scale)

    cost_e = _exact_cost_matrix(space, rows, cols)
    flows = _tree_flows(basis, a, b)
    if any(val < 0 for val in flows.values()):
        # The float basis is exactly infeasible (can happen under heavy
        # degeneracy); redo everything in rational arithmetic.
        flows, basis, u, v = _transport_simplex(cost_e, a, b, eps=Fraction(0))
    else:
        flows, basis, u, v = _transport_simplex(
            cost_e, a, b, eps=Fraction(0), start=(flows, basis))

    basis_set = set(basis)
    margin = None
    for i in range(m):
        for j in range(n):
            if (i, j) not in basis_set:
                r = cost_e[i][j] - u[i] - v[j]
                if margin is None or r < margin:
                    margin = r
    if margin is None:
        margin = Fraction(0)  # no nonbasic cell (1x1 etc.)
    if margin < 0:
        raise RuntimeError("exact simplex terminated with a negative margin")

    plan = _plan_from_flows(space, mu0, mu1, rows, cols, flows,
                            duals=(tuple(u), tuple(v)), margin=margin,
                            basis=basis)
    return plan, plan.w2


def product_plan(mu0: DiscreteMeasure, mu1: DiscreteMeasure) -> TransportPlan:
    """The independent coupling mu0 (x) mu1, exact."""
    rows, cols, a, b = _supports_and_masses(mu0, mu1)
    total = sum(a, Fraction(0))
    mat = [[a[r] * b[c] / total for c in range(len(cols))] for r in range(len(rows))]
    return TransportPlan(mu0.space, mu0, mu1, rows, cols, mat)


# ---------------------------------------------------------------------------
# map detection
# ---------------------------------------------------------------------------

def is_induced_by_map(plan: TransportPlan, tol_mass: float = MAP_MASS_TOL):
    """Detect whether the plan is the graph of a map.

    Returns ``(True, mapping)`` with a point-id dict when every source row of
    mass > tol has a single destination, else ``(False, witness)`` where the
    witness is ``(source_id, destination_ids)`` for the first splitting row.
    """
    ids = plan.space.point_ids
    mapping = {}
    for r, p in enumerate(plan.row_points):
        row = plan.coupling_exact[r]
        if float(sum(row, Fraction(0))) <= tol_mass:
            continue
        dests = [plan.col_points[c] for c, x in enumerate(row) if float(x) > tol_mass]
        if len(dests) > 1:
            return False, (ids[p], tuple(ids[q] for q in dests))
        mapping[ids[p]] = ids[dests[0]]
    return True, mapping


# ---------------------------------------------------------------------------
# c-cyclical monotonicity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityWitness:
    """A subset of support pairs and a permutation that strictly lowers cost.

    ``pairs[k]`` keeps its source; its new target is ``pairs[permutation[k]]``'s
    target.  ``decrease_exact`` is the exact cost drop (> 0).
    """

    pairs: tuple[tuple[int, int], ...]
    permutation: tuple[int, ...]
    decrease_exact: Fraction

    def reevaluate(self, space: FiniteMetricMeasureSpace) -> Fraction:
        d = space.dist
        orig = sum((as_fraction(float(d[x, y])) ** 2 for x, y in self.pairs),
                   Fraction(0))
        perm = sum((as_fraction(float(d[self.pairs[k][0],
                                        self.pairs[self.permutation[k]][1]])) ** 2
                    for k in range(len(self.pairs))), Fraction(0))
        return orig - perm

    def check(self, space: FiniteMetricMeasureSpace,
              min_decrease: float = WITNESS_DECREASE) -> None:
        drop = self.reevaluate(space)
        if drop != self.decrease_exact:
            raise AssertionError("stored decrease does not reproduce")
        if not float(drop) > min_decrease:
            raise AssertionError(f"witness decrease {float(drop)} <= {min_decrease}")


@dataclass(frozen=True)
class MonotonicityCertificate:
    verdict: str  # "monotone" | "violated"
    pairs: tuple[tuple[int, int], ...]
    max_cycle: int
    witness: MonotonicityWitness | None = None

    @property
    def is_monotone(self) -> bool:
        return self.verdict == "monotone"


def check_c_monotone(space: FiniteMetricMeasureSpace, support_pairs,
                     max_cycle: int | None = None) -> MonotonicityCertificate:
    """Cyclical monotonicity of a support set for squared-distance cost.

    Looks for an improving reassignment on subsets of at most ``max_cycle``
    pairs (default min(5, #pairs)).  An improving permutation exists iff an
    improving cycle does, so the search runs a min-plus dynamic program over
    the pair graph in exact arithmetic and extracts a simple cycle witness.
    For couplings whose support has at most 5 rows this decides optimality
    exactly.
    """
    pairs = tuple((space.index(x), space.index(y)) for x, y in support_pairs)
    if not pairs:
        raise ValueError("empty support")
    npairs = len(pairs)
    if max_cycle is None:
        max_cycle = min(5, npairs)
    max_cycle = max(2, min(max_cycle, npairs))

    d = space.dist
    sq = [[as_fraction(float(d[x, y])) ** 2 for (_, y) in pairs]
          for (x, _) in pairs]
    # arc p -> q: source of p is reassigned to the target of q
    w = [[sq[p][q] - sq[p][p] for q in range(npairs)] for p in range(npairs)]

    best = [row[:] for row in w]  # best walk cost of the current length
    # parent_tables[k - 1][p][q] = r with best_k(p, q) = best_{k-1}(p, r) + w(r, q)
    parent_tables: list = [None]  # length-1 walks have no intermediate node
    for length in range(2, max_cycle + 1):
        nxt = [[None] * npairs for _ in range(npairs)]
        par = [[0] * npairs for _ in range(npairs)]
        for p in range(npairs):
            bp = best[p]
            for q in range(npairs):
                cand_val = None
                cand_r = 0
                for r in range(npairs):
                    val = bp[r] + w[r][q]
                    if cand_val is None or val < cand_val:
                        cand_val = val
                        cand_r = r
                nxt[p][q] = cand_val
                par[p][q] = cand_r
        best = nxt
        parent_tables.append(par)

        for p in range(npairs):
            if best[p][p] < 0:
                # reconstruct the closed walk of this length from parents
                nodes = [p]
                q = p
                for ln in range(length, 1, -1):
                    r = parent_tables[ln - 1][p][q]
                    nodes.append(r)
                    q = r
                nodes.reverse()  # walk p -> ... -> p, length `length`
                cycle = _simple_negative_cycle(nodes, w)
                if cycle is None:
                    continue
                subset = tuple(pairs[k] for k in cycle)
                perm = tuple((k + 1) % len(cycle) for k in range(len(cycle)))
                drop = -sum((w[cycle[k]][cycle[(k + 1) % len(cycle)]]
                             for k in range(len(cycle))), Fraction(0))
                witness = MonotonicityWitness(subset, perm, drop)
                return MonotonicityCertificate("violated", pairs, max_cycle, witness)

    return MonotonicityCertificate("monotone", pairs, max_cycle)


def _simple_negative_cycle(nodes, w):
    """Reduce a negative closed walk to a simple negative cycle (node list)."""
    walk = list(nodes)  # starts and ends at the same node
    if walk[0] == walk[-1]:
        walk = walk[:-1]
    while True:
        seen = {}
        dup = None
        for pos, nd in enumerate(walk):
            if nd in seen:
                dup = (seen[nd], pos)
                break
            seen[nd] = pos
        if dup is None:
            break
        lo, hi = dup
        inner = walk[lo:hi]
        outer = walk[:lo] + walk[hi:]
        def cost(cyc):
            return sum((w[cyc[k]][cyc[(k + 1) % len(cyc)]]
                        for k in range(len(cyc))), Fraction(0))
        if len(inner) >= 2 and cost(inner) < 0:
            walk = inner
        elif len(outer) >= 2 and cost(outer) < 0:
            walk = outer
        else:
            return None
    if len(walk) < 2:
        return None
    total = sum((w[walk[k]][walk[(k + 1) % len(walk)]]
                 for k in range(len(walk))), Fraction(0))
    return walk if total < 0 else None


# ---------------------------------------------------------------------------
# optimal-face vertex enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VertexEnumeration:
    plans: tuple[TransportPlan, ...]
    truncated: bool
    bases_explored: int

    @property
    def unique(self) -> bool:
        """True when the optimal plan is unique (0-dimensional optimal face)."""
        return len(self.plans) == 1 and not self.truncated

    def __iter__(self):
        return iter(self.plans)

    def __len__(self):
        return len(self.plans)


def enumerate_optimal_vertices(space: FiniteMetricMeasureSpace,
                               mu0: DiscreteMeasure, mu1: DiscreteMeasure,
                               max_vertices: int = 64,
                               max_bases: int = 20000) -> VertexEnumeration:
    """All vertices of the optimal face of the transportation polytope.

    By complementary slackness every optimal coupling lives on the cells with
    exactly zero reduced cost (against any exact optimal dual), and every
    feasible coupling on those cells is optimal.  The optimal face is thus a
    smaller transportation polytope with forbidden cells, whose vertices are
    enumerated by breadth-first pivoting over its bases.  Distinct basic
    solutions are deduplicated exactly.

    Intended for supports of modest size (the documented contract is <= 12
    points per side; a hard error fires above 40).  ``truncated`` reports a
    cap hit, in which case uniqueness must not be concluded.
    """
    rows, cols, a, b = _supports_and_masses(mu0, mu1)
    m, n = len(rows), len(cols)
    if max(m, n) > 40:
        raise ValueError("support too large for vertex enumeration (>40 points)")

    plan, _ = solve_w2(space, mu0, mu1)
    u, v = plan.duals
    cost_e = _exact_cost_matrix(space, rows, cols)
    allowed = set()
    for i in range(m):
        for j in range(n):
            if cost_e[i][j] - u[i] - v[j] == 0:
                allowed.add((i, j))
    # Seed with the basis that produced the duals; its cells satisfy
    # u_i + v_j = c_ij by construction, hence lie inside the allowed set.
    solver_basis = list(plan.basis)
    for cell in solver_basis:
        if cell not in allowed:
            raise RuntimeError("solver basis leaves the zero-reduced-cost set")

    def canon(basis_iter):
        return frozenset(basis_iter)

    def solution_key(flows):
        return tuple(sorted((cell, val) for cell, val in flows.items() if val > 0))

    seen_bases = {canon(solver_basis)}
    start_flows = _tree_flows(solver_basis, a, b)
    queue = [(start_flows, list(solver_basis))]
    solutions = {solution_key(start_flows): start_flows}
    truncated = False
    explored = 0

    while queue:
        flows, basis = queue.pop()
        explored += 1
        if explored > max_bases:
            truncated = True
            break
        basis_set = set(basis)
        for entering in sorted(allowed - basis_set):
            cycle = _tree_cycle(basis, entering)
            minus = cycle[1::2]
            theta = min(flows[c] for c in minus)
            leaving = min(c for c in minus if flows[c] == theta)
            new_basis = [entering if c == leaving else c for c in basis]
            key = canon(new_basis)
            if key in seen_bases:
                continue
            seen_bases.add(key)
            new_flows = dict(flows)
            new_flows[entering] = new_flows.get(entering, Fraction(0))
            for k, cell in enumerate(cycle):
                if k % 2 == 0:
                    new_flows[cell] = new_flows[cell] + theta
                else:
                    new_flows[cell] = new_flows[cell] - theta
            del new_flows[leaving]
            skey = solution_key(new_flows)
            if skey not in solutions:
                if len(solutions) >= max_vertices:
                    truncated = True
                    queue = []
                    break
                solutions[skey] = new_flows
            queue.append((new_flows, new_basis))

    plans = tuple(
        _plan_from_flows(space, mu0, mu1, rows, cols, flows,
                         duals=(tuple(u), tuple(v)), margin=plan.margin_exact)
        for _, flows in sorted(solutions.items()))
    return VertexEnumeration(plans, truncated, explored)


# ---------------------------------------------------------------------------
# dynamical plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicalPlan:
    """A coupling lifted to geodesics: weighted chains instead of pairs."""

    space: FiniteMetricMeasureSpace
    items: tuple[tuple[GeodesicPath, Fraction], ...]

    def induced_coupling(self, source: DiscreteMeasure,
                         target: DiscreteMeasure) -> TransportPlan:
        """Project back to a static plan via (start, end) of each chain."""
        agg: dict = defaultdict(lambda: Fraction(0))
        for path, mass in self.items:
            agg[(path.start, path.end)] += mass
        rows = sorted({p for p, _ in agg})
        cols = sorted({q for _, q in agg})
        mat = [[agg.get((p, q), Fraction(0)) for q in cols] for p in rows]
        return TransportPlan(self.space, source, target, rows, cols, mat)

    def at_time(self, t: float) -> DiscreteMeasure:
        """Pushforward of the plan mass under evaluation at time t."""
        w = [Fraction(0)] * self.space.n
        for path, mass in self.items:
            w[evaluate(path, t)] += mass
        total = sum(w, Fraction(0))
        return DiscreteMeasure(self.space, w, probability=(total == 1))


def lift_to_dynamical(space: FiniteMetricMeasureSpace, plan: TransportPlan,
                      selection_policy: str = "canonical",
                      max_count: int = 32, max_plans: int = 64):
    """Lift a static plan onto geodesic chains.

    Policy "canonical" assigns each positive entry its lexicographically
    first geodesic and returns one DynamicalPlan.  Policy
    "enumerate-all-splits" returns the list of all lifts obtained by choosing,
    for every entry, one of its geodesics (an error fires if that product
    exceeds ``max_plans``).
    """
    entries = plan.pairs()
    option_lists = []
    any_truncated = False
    for p, q, mass in entries:
        geos = enumerate_geodesics(space, p, q, max_count=max_count)
        if len(geos) == 0:
            raise ValueError(f"no geodesic for pair ({space.point_ids[p]!r}, "
                             f"{space.point_ids[q]!r})")
        any_truncated = any_truncated or geos.truncated
        option_lists.append([(g, mass) for g in geos.paths])

    if selection_policy == "canonical":
        return DynamicalPlan(space, tuple(opts[0] for opts in option_lists))
    if selection_policy == "enumerate-all-splits":
        if any_truncated:
            raise ValueError("geodesic enumeration was truncated; raise "
                             "max_count before enumerating all lifts")
        count = 1
        for opts in option_lists:
            count *= len(opts)
            if count > max_plans:
                raise ValueError(
                    f"more than {max_plans} lifts; raise max_plans or use the "
                    "canonical policy")
        return [DynamicalPlan(space, combo)
                for combo in itertools.product(*option_lists)]
    raise ValueError(f"unknown selection policy {selection_policy!r}")


# ---------------------------------------------------------------------------
# plan splitting
# ---------------------------------------------------------------------------

def split_plan(space: FiniteMetricMeasureSpace, plan: TransportPlan,
               target_ball):
    """Split an optimal plan along a target ball into two dominated plans.

    ``target_ball`` is either ``(center, radius)`` or an explicit collection
    of target points.  Writing sigma1 / sigma2 for the restriction of the
    plan to target points inside / outside the ball and rho1 / rho2 for their
    source-marginal densities against the reference weights, each part is
    reweighted per source row by min(rho1, rho2) / rho_k.  The two returned
    plans then have

    * identical first marginals (exactly),
    * mutually singular second marginals,
    * entrywise domination by the input plan,
    * and each part, normalized, is optimal for its own marginals.

    All four postconditions are verified before returning.  Raises
    ``ValueError("plan already map-like on this ball")`` when no source row
    has mass strictly on both sides.
    """
    if isinstance(target_ball, tuple) and len(target_ball) == 2 \
            and isinstance(target_ball[1], (int, float, Fraction)) \
            and not isinstance(target_ball[1], bool):
        center, radius = target_ball
        ball = set(int(i) for i in space.ball(center, float(radius)))
    else:
        ball = {space.index(p) for p in target_ball}

    m = len(plan.row_points)
    in_ball = [c for c, q in enumerate(plan.col_points) if q in ball]
    out_ball = [c for c, q in enumerate(plan.col_points) if q not in ball]

    row_in = [sum((plan.coupling_exact[r][c] for c in in_ball), Fraction(0))
              for r in range(m)]
    row_out = [sum((plan.coupling_exact[r][c] for c in out_ball), Fraction(0))
               for r in range(m)]
    if not any(ri > 0 and ro > 0 for ri, ro in zip(row_in, row_out)):
        raise ValueError("plan already map-like on this ball")

    ref = space.ref_weights_exact
    for r, p in enumerate(plan.row_points):
        if (row_in[r] > 0 or row_out[r] > 0) and ref[p] == 0:
            raise ValueError(
                f"source point {space.point_ids[p]!r} has zero reference "
                "weight; densities are undefined")

    def densities(row_masses):
        return [row_masses[r] / ref[plan.row_points[r]] if row_masses[r] > 0
                else Fraction(0) for r in range(m)]

    rho1, rho2 = densities(row_in), densities(row_out)
    rho_min = [min(r1, r2) for r1, r2 in zip(rho1, rho2)]

    def build_part(cols_sel, rho_k):
        mat = []
        for r in range(m):
            factor = rho_min[r] / rho_k[r] if rho_k[r] > 0 else Fraction(0)
            mat.append([plan.coupling_exact[r][c] * factor for c in cols_sel])
        col_pts = [plan.col_points[c] for c in cols_sel]
        src_w = [Fraction(0)] * space.n
        tgt_w = [Fraction(0)] * space.n
        for r in range(m):
            src_w[plan.row_points[r]] += sum(mat[r], Fraction(0))
        for k, q in enumerate(col_pts):
            tgt_w[q] += sum((mat[r][k] for r in range(m)), Fraction(0))
        source = DiscreteMeasure(space, src_w, probability=False)
        target = DiscreteMeasure(space, tgt_w, probability=False)
        return TransportPlan(space, source, target, plan.row_points,
                             col_pts, mat)

    part1 = build_part(in_ball, rho1)
    part2 = build_part(out_ball, rho2)

    _verify_split(space, plan, part1, part2)
    return part1, part2


def _verify_split(space, plan, part1, part2):
    if part1.source.exact != part2.source.exact:
        raise RuntimeError("split postcondition failed: first marginals differ")
    from .spaces import mutually_singular
    if not mutually_singular(part1.target, part2.target):
        raise RuntimeError("split postcondition failed: second marginals overlap")
    whole = {(p, q): x for p, q, x in plan.pairs()}
    for part in (part1, part2):
        for p, q, x in part.pairs():
            if x > whole.get((p, q), Fraction(0)):
                raise RuntimeError("split postcondition failed: no domination")
    for part in (part1, part2):
        total = part.total_mass_exact
        if total == 0:
            raise RuntimeError("split produced an empty part")
        opt, _ = solve_w2(space, part.source.normalized(), part.target.normalized())
        if part.cost_exact / total != opt.cost_exact:
            raise ValueError(
                "split part is not optimal for its marginals; the input plan "
                "was not an optimal coupling")
