from fractions import Fraction

import numpy as np
import pytest

import mmsot


def test_interval_grid_and_mass():
    sp = mmsot.build_interval(1.0, Fraction(1, 16))
    assert sp.n == 17
    assert sp.total_mass_exact() == 1
    assert sp.h == pytest.approx(1 / 16)
    assert sp.validate().is_valid
    # endpoints carry half cells
    assert sp.ref_weights_exact[0] == Fraction(1, 32)
    assert sp.ref_weights_exact[1] == Fraction(1, 16)


def test_interval_rounds_step_up():
    # length 1, h=0.3 cannot tile; the builder shrinks the step to 1/4
    sp = mmsot.build_interval(1.0, 0.3)
    assert sp.n == 5
    assert sp.dist[0, sp.n - 1] == pytest.approx(1.0)


def test_circle_ring_metric():
    sp = mmsot.build_circle(1.0, Fraction(1, 8))
    assert sp.n == 8
    assert sp.total_mass_exact() == 1
    i, j = sp.index("c1"), sp.index("c6")
    # three steps the short way around
    assert sp.dist[i, j] == pytest.approx(3 / 8)
    assert sp.validate().is_valid


def test_circle_needs_three_points():
    with pytest.raises(ValueError):
        mmsot.build_circle(1.0, 0.5)


def test_polyline_arclength_metric():
    sp = mmsot.build_polyline((1.0, 1.0), Fraction(1, 4))
    assert sp.n == 9
    assert sp.total_mass_exact() == 2
    assert sp.dist[0, sp.n - 1] == pytest.approx(2.0)
    # planar positions exist and the corner point sits at arclength 1
    corner = mmsot.arclength_point(sp, 1.0)
    lab = sp.labels[sp.index(corner)]
    assert lab["s"] == pytest.approx(1.0)
    assert "xy" in lab


def test_tripod_leg_metric(tripod_unit):
    sp = tripod_unit
    assert sp.total_mass_exact() == 3
    a2, b2 = sp.index("A2"), sp.index("B2")
    hub = sp.index("hub")
    # cross-leg distances add through the hub
    assert sp.dist[a2, b2] == pytest.approx(1.0)
    assert sp.dist[hub, a2] == pytest.approx(0.5)
    assert sp.validate().is_valid


def test_tripod_short_leg_gets_own_step():
    # a leg shorter than h still gets one cell; its step shrinks to the leg
    sp = mmsot.build_tripod((1.0, 1.0, 0.25), Fraction(1, 2))
    assert sp.point_ids == ("hub", "A1", "A2", "B1", "B2", "C1")
    assert sp.dist[sp.index("hub"), sp.index("C1")] == pytest.approx(0.25)
    assert sp.total_mass_exact() == Fraction(9, 4)


def test_tripod_point_lookup(tripod_unit):
    assert mmsot.tripod_point(tripod_unit, "B", 0.5) == "B2"
    assert mmsot.tripod_point(tripod_unit, "A", 0.0) == "hub"


def test_fan_atoms_and_weights():
    sp = mmsot.build_fan(4)
    atoms = mmsot.fan_atom_ids_by_radius(sp)
    assert len(atoms) == 2 ** 4 - 1
    # radii are the dyadics v / 16, pairwise distinct
    radii = [sp.labels[sp.index(a)]["radius_exact"] for a in atoms]
    assert len(set(radii)) == len(radii)
    assert radii == sorted(radii)
    assert radii[0] == Fraction(1, 16) and radii[-1] == Fraction(15, 16)
    # segment plus atom reference mass: one unit each
    assert sp.total_mass_exact() == 2
    assert sp.validate().is_valid


def test_fan_atom_id_mapping():
    sp = mmsot.build_fan(4)
    assert mmsot.fan_atom(sp, "0000") == "origin"
    aid = mmsot.fan_atom(sp, "1011")
    lab = sp.labels[sp.index(aid)]
    assert lab["radius_exact"] == Fraction(11, 16)
    assert lab["ones"] == 3
    with pytest.raises(ValueError):
        mmsot.fan_atom(sp, "10x1")


def test_fan_bernoulli_measure_exact():
    sp = mmsot.build_fan(4)
    mu = mmsot.fan_bernoulli_measure(sp, Fraction(1, 2))
    assert mu.mass_exact() == 1
    # every atom (origin included) carries 2^-4
    assert mu.exact[sp.index("origin")] == Fraction(1, 16)
    assert mu.exact[sp.index(mmsot.fan_atom(sp, "0110"))] == Fraction(1, 16)


def test_fan_depth_capped():
    with pytest.raises(ValueError):
        mmsot.build_fan(15)


def test_fan_segment_ids_sorted():
    sp = mmsot.build_fan(4)
    segs = mmsot.fan_segment_ids(sp)
    coords = [sp.labels[sp.index(p)]["s"] for p in segs]
    assert coords == sorted(coords)
    assert "origin" not in segs


def test_quantile_subset_even_spread():
    assert mmsot.quantile_subset(list(range(10)), 5) == [1, 3, 5, 7, 9]
    assert mmsot.quantile_subset(list(range(3)), 3) == [0, 1, 2]
    with pytest.raises(ValueError):
        mmsot.quantile_subset([1, 2], 3)


def test_cusp_grid_shape():
    sp = mmsot.build_cusp(Fraction(1, 16))
    assert sp.n == 61
    assert sp.total_mass_exact() == Fraction(61, 256)
    assert sp.validate().is_valid
    # columns widen quadratically: none at |x| = h, two rows out at the rim
    assert "p1_1" not in sp.point_ids
    assert "p8_4" in sp.point_ids
    assert mmsot.cusp_point(sp, -0.5, 0.0) == "p-8_0"


def test_cusp_metric_is_graph_metric():
    sp = mmsot.build_cusp(Fraction(1, 16))
    h = 1 / 16
    i, j = sp.index("p0_0"), sp.index("p8_0")
    # straight spine run
    assert sp.dist[i, j] == pytest.approx(8 * h)
    # crossing the cusp forces a path through the waist
    l, r = sp.index("p-8_4"), sp.index("p8_4")
    assert sp.dist[l, r] >= 16 * h - 1e-12


def test_cusp_step_capped():
    with pytest.raises(ValueError):
        mmsot.build_cusp(Fraction(1, 8))


def test_scenario_spec_roundtrip():
    spec = mmsot.ScenarioSpec.of("interval", h=Fraction(1, 8))
    sp, manifest = mmsot.build_scenario(spec)
    assert sp.n == 9
    assert manifest["scenario"] == "interval"
    assert manifest["parameters"]["h"] == "1/8"
    assert manifest["points"] == sp.n


def test_scenario_defaults_cover_all_names():
    for name in mmsot.SCENARIO_NAMES:
        sp, manifest = mmsot.build_scenario(mmsot.ScenarioSpec.of(name))
        assert manifest["scenario"] == name
        assert sp.n >= 2


def test_scenario_unknown_name_and_param():
    with pytest.raises(ValueError):
        mmsot.ScenarioSpec.of("moebius")
    with pytest.raises(ValueError):
        mmsot.build_scenario(mmsot.ScenarioSpec.of("interval", depth=3))


def test_gadget_two_branch_segments():
    g = mmsot.build_gadget("two_branch_segments")
    assert g.expected_phenomenon == "no-monge-map"
    assert g.mu0.mass_exact() == 1 and g.mu1.mass_exact() == 1
    assert mmsot.mutually_singular(g.mu0, g.mu1)


def test_gadget_equidistant_diracs():
    g = mmsot.build_gadget("equidistant_diracs")
    assert g.expected_phenomenon == "product-plan-optimal"
    plan, _ = mmsot.solve_w2(g.space, g.mu0, g.mu1)
    prod = mmsot.product_plan(g.mu0, g.mu1)
    assert prod.cost_exact == plan.cost_exact


def test_gadget_equidistant_balls():
    g = mmsot.build_gadget("equidistant_balls")
    assert g.expected_phenomenon == "no-map-to-ac-target"
    assert g.mu1.ac_flag


def test_gadget_unknown_name():
    with pytest.raises(ValueError):
        mmsot.build_gadget("pentapod")
