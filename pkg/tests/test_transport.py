from fractions import Fraction

import numpy as np
import pytest

import mmsot
from mmsot.transport import InfeasibleMarginals

from conftest import line_space, random_line_space, random_marginals
from oracles import exact_min_cost, linprog_min_cost, squared_cost_matrix


def solver_supports(mu0, mu1):
    rows = [k for k, w in enumerate(mu0.exact) if w > 0]
    cols = [k for k, w in enumerate(mu1.exact) if w > 0]
    a = [mu0.exact[k] for k in rows]
    b = [mu1.exact[k] for k in cols]
    return rows, cols, a, b


def test_two_point_swap_exact():
    sp = line_space([0, 1, 3, 4])
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    plan, w2 = mmsot.solve_w2(sp, mu0, mu1)
    # identity-order matching: 0->3, 1->4 costs (9+9)/2, sorted matching
    # 0->3, 1->4 equals 3^2/2 + 3^2/2
    assert plan.cost_exact == Fraction(9)
    assert w2 == pytest.approx(3.0)
    assert plan.is_certified_optimal


def test_certificate_duals_support_equality():
    sp = line_space([0, 2, 5, 6])
    mu0 = mmsot.DiscreteMeasure(sp, [Fraction(1, 3), Fraction(2, 3), 0, 0])
    mu1 = mmsot.DiscreteMeasure(sp, [0, 0, Fraction(1, 2), Fraction(1, 2)])
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    u, v = plan.duals
    rows, cols, _, _ = solver_supports(mu0, mu1)
    cost = squared_cost_matrix(sp, rows, cols)
    assert plan.margin_exact >= 0
    for i in range(len(rows)):
        for j in range(len(cols)):
            slack = cost[i][j] - u[i] - v[j]
            assert slack >= 0
    for r, c, mass in plan.pairs():
        i, j = rows.index(r), cols.index(c)
        assert cost[i][j] - u[i] - v[j] == 0


def test_matches_tree_oracle_random(rng):
    for _ in range(60):
        sp = random_line_space(rng, int(rng.integers(4, 8)))
        m = int(rng.integers(2, min(5, sp.n - 1)))
        n = int(rng.integers(2, min(5, sp.n - m + 1)))
        mu0, mu1 = random_marginals(rng, sp, m, n)
        plan, _ = mmsot.solve_w2(sp, mu0, mu1)
        rows, cols, a, b = solver_supports(mu0, mu1)
        cost = squared_cost_matrix(sp, rows, cols)
        assert plan.cost_exact == exact_min_cost(cost, a, b)


def test_matches_linprog_random(rng):
    for _ in range(20):
        sp = random_line_space(rng, 6)
        mu0, mu1 = random_marginals(rng, sp, 3, 3)
        plan, _ = mmsot.solve_w2(sp, mu0, mu1)
        rows, cols, a, b = solver_supports(mu0, mu1)
        cost = squared_cost_matrix(sp, rows, cols)
        assert float(plan.cost_exact) == pytest.approx(
            linprog_min_cost(cost, a, b), abs=1e-9)


def test_marginals_reproduced_exactly(rng):
    sp = random_line_space(rng, 7)
    mu0, mu1 = random_marginals(rng, sp, 3, 4)
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    assert plan.marginal_first().exact == mu0.exact
    assert plan.marginal_second().exact == mu1.exact


def test_unequal_masses_rejected():
    sp = line_space([0, 1])
    mu0 = mmsot.DiscreteMeasure(sp, [Fraction(1), Fraction(0)],
                                probability=False)
    mu1 = mmsot.DiscreteMeasure(sp, [0, Fraction(1, 2)], probability=False)
    with pytest.raises(InfeasibleMarginals):
        mmsot.solve_w2(sp, mu0, mu1)


def test_sorted_matching_on_line_is_optimal(rng):
    # with equal atom counts and equal weights, quadratic cost on a line is
    # minimized by the order-preserving matching
    for _ in range(20):
        coords = np.sort(rng.choice(60, size=6, replace=False))
        sp = line_space(coords)
        mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1", "x2"])
        mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x3", "x4", "x5"])
        plan, _ = mmsot.solve_w2(sp, mu0, mu1)
        expected = sum(Fraction(int(coords[k + 3] - coords[k])) ** 2
                       for k in range(3)) / 3
        assert plan.cost_exact == expected
        induced, mapping = mmsot.is_induced_by_map(plan)
        assert induced
        assert mapping == {"x0": "x3", "x1": "x4", "x2": "x5"}


def test_product_plan_not_a_map():
    sp = line_space([0, 1, 5, 7])
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    pi = mmsot.product_plan(mu0, mu1)
    assert pi.total_mass_exact == 1
    induced, witness = mmsot.is_induced_by_map(pi)
    assert not induced
    src, dests = witness
    assert src in {"x0", "x1"} and set(dests) == {"x2", "x3"}


def test_monotone_support_accepted():
    sp = line_space([0, 1, 10, 11])
    cert = mmsot.check_c_monotone(sp, [("x0", "x2"), ("x1", "x3")])
    assert cert.is_monotone
    assert cert.witness is None


def test_crossing_support_rejected_with_witness():
    sp = line_space([0, 1, 10, 11])
    cert = mmsot.check_c_monotone(sp, [("x0", "x3"), ("x1", "x2")])
    assert not cert.is_monotone
    cert.witness.check(sp)
    # un-crossing is the improving permutation on two pairs
    assert sorted(cert.witness.permutation) == [0, 1]
    assert cert.witness.permutation != (0, 1)


def test_optimal_support_is_monotone_random(rng):
    for _ in range(40):
        sp = random_line_space(rng, int(rng.integers(4, 7)))
        m = int(rng.integers(2, sp.n - 1))
        n = int(rng.integers(2, sp.n - m + 1))
        mu0, mu1 = random_marginals(rng, sp, m, n)
        plan, _ = mmsot.solve_w2(sp, mu0, mu1)
        ids = sp.point_ids
        pairs = [(ids[p], ids[q]) for p, q, _ in plan.pairs()]
        assert mmsot.check_c_monotone(sp, pairs).is_monotone


def test_perturbed_optimal_support_detected(rng):
    # moving one unit of mass off the optimal support must break
    # monotonicity or keep the cost equal; check the first kind is caught
    sp = line_space([0, 1, 10, 11])
    pairs = [("x0", "x3"), ("x1", "x2")]  # crossed on purpose
    cert = mmsot.check_c_monotone(sp, pairs, max_cycle=2)
    assert cert.verdict == "violated"
    assert cert.witness.decrease_exact > 0


def test_vertex_enumeration_unique_when_distances_distinct():
    sp = line_space([0, 1, 7, 12])
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    res = mmsot.enumerate_optimal_vertices(sp, mu0, mu1)
    assert res.unique
    assert res.plans[0].same_coupling(mmsot.solve_w2(sp, mu0, mu1)[0])


def test_vertex_enumeration_degenerate_square():
    # two sources and two sinks all at mutual distance alpha: every coupling
    # is optimal and the polytope has two vertices (the two permutations)
    d = np.array([
        [0.0, 2.0, 1.0, 1.0],
        [2.0, 0.0, 1.0, 1.0],
        [1.0, 1.0, 0.0, 2.0],
        [1.0, 1.0, 2.0, 0.0],
    ])
    sp = mmsot.FiniteMetricMeasureSpace(["a0", "a1", "b0", "b1"], d,
                                        [1, 1, 1, 1])
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["a0", "a1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["b0", "b1"])
    res = mmsot.enumerate_optimal_vertices(sp, mu0, mu1)
    assert len(res) == 2 and not res.truncated
    for plan in res:
        assert plan.cost_exact == Fraction(1)


def test_vertex_enumeration_agrees_with_oracle(rng):
    from oracles import distinct_optimal_vertices
    for _ in range(15):
        sp = random_line_space(rng, 6)
        mu0, mu1 = random_marginals(rng, sp, 3, 3)
        res = mmsot.enumerate_optimal_vertices(sp, mu0, mu1)
        rows, cols, a, b = solver_supports(mu0, mu1)
        cost = squared_cost_matrix(sp, rows, cols)
        expect = distinct_optimal_vertices(cost, a, b)
        got = set()
        for plan in res:
            got.add(frozenset(((rows.index(p), cols.index(q)), x)
                              for p, q, x in plan.pairs()))
        assert got == expect


def test_lift_project_roundtrip(tripod_unit):
    sp = tripod_unit
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["A2", "A4"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["B2", "C3"])
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    dyn = mmsot.lift_to_dynamical(sp, plan)
    back = dyn.induced_coupling(mu0, mu1)
    assert back.same_coupling(plan)


def test_dynamical_midpoint_mass_conserved(tripod_unit):
    sp = tripod_unit
    mu0 = mmsot.DiscreteMeasure.dirac(sp, "A4")
    mu1 = mmsot.DiscreteMeasure.dirac(sp, "B4")
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    dyn = mmsot.lift_to_dynamical(sp, plan)
    mid = dyn.at_time(0.5)
    assert mid.mass_exact() == 1
    # halfway from one leg end to another passes the hub
    assert mid.exact[sp.index("hub")] == 1


def test_lift_enumerates_all_splits():
    sp = mmsot.build_circle(1.0, Fraction(1, 8))
    mu0 = mmsot.DiscreteMeasure.dirac(sp, "c0")
    mu1 = mmsot.DiscreteMeasure.dirac(sp, "c4")
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    lifts = mmsot.lift_to_dynamical(sp, plan,
                                    selection_policy="enumerate-all-splits")
    assert len(lifts) == 2


def test_split_plan_postconditions(rng):
    done = 0
    for _ in range(30):
        sp = random_line_space(rng, 7)
        mu0, mu1 = random_marginals(rng, sp, 2, 4)
        plan, _ = mmsot.solve_w2(sp, mu0, mu1)
        induced, _ = mmsot.is_induced_by_map(plan)
        if induced:
            continue
        # find a target split that actually divides some source row
        cols = sorted({q for _, q, _ in plan.pairs()})
        for take in range(1, len(cols)):
            ball_pts = [sp.point_ids[q] for q in cols[:take]]
            try:
                part1, part2 = mmsot.split_plan(sp, plan, ball_pts)
            except ValueError:
                continue
            assert part1.source.exact == part2.source.exact
            assert mmsot.mutually_singular(part1.target, part2.target)
            done += 1
            break
    assert done >= 5


def test_split_plan_rejects_map_like_ball():
    sp = line_space([0, 1, 10, 11])
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    with pytest.raises(ValueError, match="map-like"):
        mmsot.split_plan(sp, plan, ["x2"])
