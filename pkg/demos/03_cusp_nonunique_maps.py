"""Two optimal maps at once on a cusp-shaped grid region.

The region pinches to a single point at the origin, so mass crossing
from the left lobe to the right lobe funnels through it.  Between the
right symmetric pair of two-point measures there are two optimal plans,
and both of them are deterministic maps: optimal maps exist but are not
unique.  The grid metric stays within a few steps of the ambient
sup-norm distance, so this is a property of the region, not an artifact
of discretization.
"""

from fractions import Fraction

import numpy as np

import mmsot

h = Fraction(1, 32)
space = mmsot.build_cusp(h)
print(f"cusp grid at h = {h}: {space.n} points")

# spot-check geodesicity: intrinsic distance is never below the ambient
# sup-norm distance and never more than 4h above it
rng = np.random.default_rng(7)
xy = [lab["xy"] for lab in space.labels]
worst = 0.0
for _ in range(100):
    i, j = rng.integers(0, space.n, size=2)
    ambient = max(abs(xy[i][0] - xy[j][0]), abs(xy[i][1] - xy[j][1]))
    worst = max(worst, float(space.dist[i, j]) - ambient)
print(f"largest intrinsic-ambient gap over 100 pairs: {worst:.6f} "
      f"(bound {float(4 * h):.6f})")

sources = ["p-13_0", "p-13_4"]
targets = ["p13_0", "p13_4"]
dists = sorted({float(space.dist[space.index(s), space.index(t)])
                for s in sources for t in targets})
print(f"\nall four source-target distances: {dists}")

mu0 = mmsot.DiscreteMeasure.uniform_on(space, sources)
mu1 = mmsot.DiscreteMeasure.uniform_on(space, targets)
print(f"marginals absolutely continuous: {mu0.ac_flag}, {mu1.ac_flag}")

enum = mmsot.enumerate_optimal_vertices(space, mu0, mu1)
print(f"optimal vertices: {len(enum.plans)}")
for k, plan in enumerate(enum.plans):
    induced, mapping = mmsot.is_induced_by_map(plan)
    arrows = ", ".join(f"{s}->{mapping[s]}" for s in sources)
    print(f"  plan {k}: map = {induced}; {arrows}")
