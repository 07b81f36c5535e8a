from fractions import Fraction

import numpy as np
import pytest

import mmsot
from mmsot.curvature import ComparisonProfile

from conftest import line_space


def test_profile_linear_and_domain():
    w = ComparisonProfile.linear(domain_radius=2.0)
    assert w(0.5) == 1.0
    assert w(2.0) == 4.0
    with pytest.raises(ValueError):
        w(2.5)
    with pytest.raises(ValueError):
        w(0.0)


def test_profile_from_table_interpolates():
    w = ComparisonProfile.from_table([0.5, 1.0], [1.0, 3.0])
    assert w(0.75) == pytest.approx(2.0)
    assert w.domain_radius == 1.0


def test_profile_rejects_nonpositive_values():
    w = ComparisonProfile.constant(0.0)
    with pytest.raises(ValueError):
        w(0.5)


def test_bg_curve_interval_midpoint_nonincreasing(interval_fine):
    sp = interval_fine
    mid = sp.point_ids[sp.n // 2]
    radii = [0.45 * (k + 1) / 6 for k in range(6)]
    curve = mmsot.bg_ratio_curve(sp, mid, ComparisonProfile.linear(), radii)
    assert curve.nonincreasing, curve.violations
    # away from the endpoints, ball mass is about 2r, so the ratio against
    # w(r) = 2r sits near 1 up to one grid layer
    for r, ratio in zip(curve.radii, curve.ratios):
        assert ratio == pytest.approx(1.0, abs=2 * float(sp.h) / r)


def test_bg_curve_constant_profile_flagged(interval_fine):
    sp = interval_fine
    mid = sp.point_ids[sp.n // 2]
    radii = [0.1, 0.2, 0.3, 0.4]
    curve = mmsot.bg_ratio_curve(sp, mid, ComparisonProfile.constant(1.0),
                                 radii)
    assert not curve.nonincreasing
    assert curve.violations


def test_bg_curve_input_validation(interval_fine):
    sp = interval_fine
    mid = sp.point_ids[sp.n // 2]
    w = ComparisonProfile.linear()
    with pytest.raises(ValueError):
        mmsot.bg_ratio_curve(sp, mid, w, [])
    with pytest.raises(ValueError):
        mmsot.bg_ratio_curve(sp, mid, w, [0.2, 0.2])


def test_bg_curve_respects_explicit_measure(interval_fine):
    sp = interval_fine
    mid = sp.point_ids[sp.n // 2]
    mu = mmsot.DiscreteMeasure.dirac(sp, mid)
    curve = mmsot.bg_ratio_curve(sp, mid, ComparisonProfile.constant(1.0),
                                 [0.1, 0.2], measure=mu)
    assert curve.masses == (1.0, 1.0)
    assert curve.nonincreasing


def test_polar_decomposition_partitions_mass(interval_fine):
    sp = interval_fine
    dec = mmsot.polar_decompose(sp, sp.point_ids[0], bin_width=0.1)
    assert dec.total_mass_exact() == sp.total_mass_exact()
    assert sum(len(b) for b in dec.bin_points) == sp.n
    # integrating the constant 1 recovers the total mass exactly
    assert dec.integrate(lambda i: 1) == sp.total_mass_exact()


def test_polar_bin_lookup(interval_fine):
    sp = interval_fine
    dec = mmsot.polar_decompose(sp, sp.point_ids[0], bin_width=0.25)
    assert dec.bin_of(0.0) == 0
    assert dec.bin_of(0.26) == 1
    with pytest.raises(ValueError):
        dec.bin_of(5.0)


def test_polar_masses_within_matches_ball(interval_fine):
    sp = interval_fine
    x0 = sp.point_ids[0]
    dec = mmsot.polar_decompose(sp, x0, bin_width=0.2)
    center = sp.point_ids[sp.n // 2]
    per_bin = dec.masses_within(center, 0.3)
    ball = sp.ball(center, 0.3)
    direct = sum((sp.ref_weights_exact[i] for i in ball), Fraction(0))
    assert sum(per_bin, Fraction(0)) == direct


def test_annulus_table_shape(interval_fine):
    sp = interval_fine
    dec = mmsot.polar_decompose(sp, sp.point_ids[0], bin_width=0.25)
    rows = mmsot.annulus_ball_table(dec, sp.point_ids[-1], sp.point_ids[3],
                                    0.2)
    assert len(rows) == len(dec.bin_points)
    for lo, hi, mass, my, mz in rows:
        assert hi > lo and mass >= 0 and my >= 0 and mz >= 0


def test_contraction_positive_on_interval(interval_fine):
    sp = interval_fine
    quarter = [p for p in sp.point_ids if sp.dist[sp.index(p), 0] > 0.75]
    rep = mmsot.nondegeneracy_check(sp, quarter, sp.point_ids[0],
                                    [0.0, 0.25, 0.5, 0.75])
    assert rep.all_positive
    assert not rep.truncated


def test_contraction_zero_mass_flagged(interval_fine):
    sp = interval_fine
    # charge only the far quarter; its contraction at t=0.25 lands outside
    # the support, so the image mass vanishes there
    quarter = [p for p in sp.point_ids if sp.dist[sp.index(p), 0] > 0.75]
    mu = mmsot.DiscreteMeasure.uniform_on(sp, quarter)
    rep = mmsot.nondegeneracy_check(sp, quarter, sp.point_ids[0],
                                    [0.0, 0.25], measure=mu)
    assert not rep.all_positive
    assert rep.failing_times() == [0.25]


def test_contraction_input_validation(interval_fine):
    sp = interval_fine
    with pytest.raises(ValueError):
        mmsot.nondegeneracy_check(sp, [], sp.point_ids[0], [0.5])
    with pytest.raises(ValueError):
        mmsot.nondegeneracy_check(sp, [sp.point_ids[1]], sp.point_ids[0],
                                  [1.0])


def test_zero_set_scaling_uniform_reference(interval_fine):
    sp = interval_fine
    rep = mmsot.contraction_zero_set_check(
        sp, sp.point_ids[0], sp.point_ids[-1], r0=0.25,
        t_grid=[0.5, 0.75, 1.0], bin_width=float(sp.h))
    # uniform mass near the far point leaves no empty shells
    assert rep.empty_set == ()
    assert rep.all_consistent


def test_zero_set_detects_hole(interval_fine):
    sp = interval_fine
    # empty out an annulus of the window by charging only points close to
    # the basepoint and the far endpoint
    keep = [p for k, p in enumerate(sp.point_ids)
            if k < 8 or k > sp.n - 3]
    mu = mmsot.DiscreteMeasure.uniform_on(sp, keep)
    rep = mmsot.contraction_zero_set_check(
        sp, sp.point_ids[0], sp.point_ids[-1], r0=0.25,
        t_grid=[1.0], bin_width=float(sp.h), measure=mu)
    assert rep.empty_set != ()


def test_zero_set_input_validation(interval_fine):
    sp = interval_fine
    with pytest.raises(ValueError):
        mmsot.contraction_zero_set_check(sp, sp.point_ids[0],
                                         sp.point_ids[-1], r0=2.0,
                                         t_grid=[0.5], bin_width=0.1)
    with pytest.raises(ValueError):
        mmsot.contraction_zero_set_check(sp, sp.point_ids[0],
                                         sp.point_ids[-1], r0=0.25,
                                         t_grid=[0.0], bin_width=0.1)
