"""Ball-growth ratio curves against a comparison weight profile.

For a weight w on radii, the quantity m(B_r(x)) / integral of w over
[0, r] should be nonincreasing in r when w matches how the space
actually spreads mass.  On a segment or a circle with the doubling
profile w(r) = 2r the ratio curve is flat up to grid effects; a
constant profile is too slow and the monotonicity check flags it.
"""

from fractions import Fraction

import mmsot

radii = [0.45 * (k + 1) / 6 for k in range(6)]

for name, space, center in [
    ("interval", mmsot.build_interval(1.0, Fraction(1, 32)), "s16"),
    ("circle", mmsot.build_circle(1.0, Fraction(1, 32)), "c8"),
]:
    curve = mmsot.bg_ratio_curve(
        space, center, mmsot.ComparisonProfile.linear(), radii)
    ratios = ", ".join(f"{r:.4f}" for r in curve.ratios)
    print(f"{name} with w(r) = 2r at {center}:")
    print(f"  ratios {ratios}")
    print(f"  nonincreasing (within grid slack): {curve.nonincreasing}")

# a constant weight underestimates growth near the center, so the ratio
# rises with r and the check reports where
radii_flat = [0.1, 0.2, 0.3, 0.4]
flat = mmsot.bg_ratio_curve(
    mmsot.build_interval(1.0, Fraction(1, 32)), "s16",
    mmsot.ComparisonProfile.constant(1.0), radii_flat)
print("\ninterval with constant w:")
print(f"  ratios {', '.join(f'{r:.4f}' for r in flat.ratios)}")
print(f"  nonincreasing: {flat.nonincreasing}")
for k, ratio_here, ratio_next, slack in flat.violations:
    print(f"  ratio rises {ratio_here:.4f} -> {ratio_next:.4f} "
          f"between radii {radii_flat[k]} and {radii_flat[k + 1]}")

# polar view of the same reference measure: mass per radial bin around
# the interval midpoint
polar = mmsot.polar_decompose(
    mmsot.build_interval(1.0, Fraction(1, 32)), "s16", Fraction(1, 8))
print(f"\npolar bins around s16 (width 1/8), mass inside B(s16, 1/2): "
      f"{[str(m) for m in polar.masses_within('s16', 0.5)]}")
