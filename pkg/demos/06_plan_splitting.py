"""Splitting a non-deterministic optimal plan into two optimal pieces.

When an optimal plan is not a map, its target support can be cut into
two groups so that the restricted plans share the same first marginal,
have mutually singular second marginals, and are each optimal for their
own pair.  This is the mechanism behind building midpoints of optimal
plans one branch at a time.
"""

from fractions import Fraction

import numpy as np

import mmsot

# an integer line whose optimal plan must split mass: two heavy sources,
# three light sinks
coords = [0, 1, 5, 6, 9]
ids = [f"x{c}" for c in coords]
dist = np.abs(np.subtract.outer(np.array(coords, float),
                                np.array(coords, float)))
space = mmsot.FiniteMetricMeasureSpace(ids, dist, [1] * len(ids))

mu0 = mmsot.DiscreteMeasure(space, [Fraction(1, 2), Fraction(1, 2),
                                    Fraction(0), Fraction(0), Fraction(0)])
mu1 = mmsot.DiscreteMeasure(space, [Fraction(0), Fraction(0), Fraction(1, 3),
                                    Fraction(1, 3), Fraction(1, 3)])

plan, _ = mmsot.solve_w2(space, mu0, mu1)
print(f"W2^2 = {plan.cost_exact}")
induced, _ = mmsot.is_induced_by_map(plan)
print(f"induced by a map: {induced}")
for p, q, x in plan.pairs():
    print(f"  {space.point_ids[p]} -> {space.point_ids[q]}: {x}")

part1, part2 = mmsot.split_plan(space, plan, ["x5"])
print("\nsplit on target group {x5}:")
for tag, part in [("part 1", part1), ("part 2", part2)]:
    rows = ", ".join(f"{space.point_ids[p]}->{space.point_ids[q]}:{x}"
                     for p, q, x in part.pairs())
    print(f"  {tag} (mass {part.total_mass_exact}): {rows}")

print(f"\nfirst marginals equal: {part1.source.exact == part2.source.exact}")
print(f"second marginals mutually singular: "
      f"{mmsot.mutually_singular(part1.target, part2.target)}")
for tag, part in [("part 1", part1), ("part 2", part2)]:
    best, _ = mmsot.solve_w2(space, part.source.normalized(),
                             part.target.normalized())
    print(f"{tag} optimal for its own marginals: "
          f"{part.cost_exact / part.total_mass_exact == best.cost_exact}")
