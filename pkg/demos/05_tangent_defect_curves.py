"""How far a blown-up neighborhood is from looking like a line.

Around a point, rescale the ball of radius R by a growing factor and
measure the distance to the best interval of matching mass.  Interior
points of a polyline flatten out (the corner is invisible to the
intrinsic metric); a tripod hub never drops below 1/2 no matter the
scale; the cusp tip improves steadily as the grid refines.
"""

from fractions import Fraction

import mmsot

schedule = [2 ** k for k in range(7)]

polyline = mmsot.build_polyline((1.0, 1.0), Fraction(1, 256))
corner = mmsot.arclength_point(polyline, 1.0)
report = mmsot.tangent_line_test(polyline, corner, schedule)
print(f"polyline corner ({corner}): verdict {report.verdict}")
for scale, defect, degenerate in report.rows:
    tag = "  (degenerate)" if degenerate else ""
    print(f"  scale {scale:5.1f}: defect {defect:.6f}{tag}")

tripod = mmsot.build_tripod((1.0, 1.0, 1.0), Fraction(1, 4))
report = mmsot.tangent_line_test(tripod, "hub", [1, 2, 4])
print(f"\ntripod hub: verdict {report.verdict}")
for scale, defect, degenerate in report.rows:
    print(f"  scale {scale:5.1f}: defect {defect:.6f}")

# pin the blow-up factor and refine the grid instead: the residual is
# pure grid coverage and halves with each refinement
print("\ncusp tip at fixed scale 16:")
for h in (Fraction(1, 16), Fraction(1, 32), Fraction(1, 64)):
    ball = mmsot.rescale_ball(mmsot.build_cusp(h), "p0_0", 16.0, 1.0)
    print(f"  h = {h}: defect {mmsot.interval_defect(ball):.6f}")

_, details = mmsot.interval_defect(
    mmsot.rescale_ball(tripod, "hub", 2.0, 1.0), return_details=True)
print(f"\nwhy the hub is stuck: {details.branch_count} branches, "
      f"distortion {details.distortion}, density gap {details.density_gap}")
