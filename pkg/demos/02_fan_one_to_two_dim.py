"""Transport from a segment onto a binary fan.

The fan hangs 2^n leaves off a single branch point, one per sign
pattern, with dyadic radii chosen so that no two leaves sit at the same
distance from the origin.  A coin-flip measure on sign patterns
concentrates near mean 1/2, yet optimal transport from the segment still
lands on a deterministic, radius-monotone map.
"""

from fractions import Fraction

import mmsot

depth = 12
space = mmsot.build_fan(depth, segment_h=Fraction(1, 32))
print(f"fan with 2^{depth} = {2 ** depth} leaves, {space.n} points total")

# every atom has its own radius: the dyadic weights make ties impossible
atoms = mmsot.fan_atom_ids_by_radius(space, include_origin=True)
radii = [space.labels[space.index(a)]["radius_exact"] for a in atoms]
print(f"distinct radii: {len(set(radii))} of {len(atoms)}")

mu = mmsot.fan_bernoulli_measure(space, Fraction(1, 2))
band = [a for a in atoms
        if abs(space.labels[space.index(a)]["mean"] - 0.5) <= 0.3]
band_mass = mu.mass_of(band)
print(f"mass with |mean - 1/2| <= 0.3: {band_mass} "
      f"= {float(band_mass):.6f}")

# twenty sources spread along the segment, twenty targets spread through
# the radius order of the fan
sources = mmsot.quantile_subset(mmsot.fan_segment_ids(space), 20)
targets = mmsot.quantile_subset(mmsot.fan_atom_ids_by_radius(space), 20)
mu0 = mmsot.DiscreteMeasure.uniform_on(space, sources)
mu1 = mmsot.DiscreteMeasure.uniform_on(space, targets)

enum = mmsot.enumerate_optimal_vertices(space, mu0, mu1)
print(f"\noptimal plan unique: {enum.unique}")
induced, mapping = mmsot.is_induced_by_map(enum.plans[0])
print(f"induced by a map: {induced}")
for s in sources[:5]:
    t = mapping[s]
    print(f"  {s} (s = {space.labels[space.index(s)]['s']:+.4f}) -> {t} "
          f"(radius {float(space.labels[space.index(t)]['radius_exact']):.4f})")
print("  ...")

image_radii = [space.labels[space.index(mapping[s])]["radius_exact"]
               for s in sources]
print(f"image radii increase along the segment: "
      f"{image_radii == sorted(image_radii)}")
