"""Three sources on one leg of a tripod, two sinks on the others.

No deterministic assignment is optimal here: the middle source wants to
split its mass between the B and C legs, and any attempt to route it
whole admits a two-swap that strictly lowers the quadratic cost.  This
script solves the instance exactly, lists every optimal vertex, and
prints the improving swap for one map-like support.
"""

from fractions import Fraction

import mmsot

space = mmsot.build_tripod((1.0, 1.0, 1.0), Fraction(1, 4))

mu0 = mmsot.DiscreteMeasure.uniform_on(space, ["A1", "A2", "A3"])
mu1 = mmsot.DiscreteMeasure.mixture([
    (mmsot.DiscreteMeasure.dirac(space, "B4"), Fraction(1, 2)),
    (mmsot.DiscreteMeasure.dirac(space, "C4"), Fraction(1, 2)),
])

plan, w2 = mmsot.solve_w2(space, mu0, mu1)
print(f"W2^2 = {plan.cost_exact} = {float(plan.cost_exact):.6f}, W2 = {w2:.6f}")
print(f"optimality margin (exact, >= 0): {plan.margin_exact}")

induced, _ = mmsot.is_induced_by_map(plan)
print(f"solver's plan induced by a map: {induced}")

# the optimal face has six vertices and none of them is deterministic
enum = mmsot.enumerate_optimal_vertices(space, mu0, mu1)
print(f"\n{len(enum.plans)} optimal vertices (truncated: {enum.truncated})")
for k, vertex in enumerate(enum.plans):
    rows = ", ".join(
        f"{space.point_ids[p]}->{space.point_ids[q]}:{x}"
        for p, q, x in vertex.pairs())
    print(f"  vertex {k}: {rows}")

# why no map works: send A1 and A3 to opposite legs at the same radius,
# A2 to a different radius, and a two-cycle swap strictly improves
pairs = [("A1", "B4"), ("A3", "C4"), ("A2", "B2")]
check = mmsot.check_c_monotone(space, pairs, max_cycle=5)
print(f"\nsupport {pairs} monotone: {check.is_monotone}")
w = check.witness
swapped = [(space.point_ids[p], space.point_ids[q]) for p, q in w.pairs]
print(f"swapping targets of {swapped} lowers the cost by "
      f"{w.decrease_exact} exactly")
