from fractions import Fraction

import pytest

import mmsot
from mmsot import reports
from mmsot.reports import Finding


def test_finding_status_labels():
    assert Finding("t", True, "d").status == "PASS"
    assert Finding("t", False, "d").status == "FAIL"
    assert Finding("t", None, "d").status == "info"


def titles(findings):
    return [f.title for f in findings]


def test_analyze_interval_emits_bg_curve(interval_fine):
    findings, artifacts = reports.analyze_scenario("interval", interval_fine)
    assert "bg_curve" in artifacts
    assert any(f.passed for f in findings)


def test_analyze_tripod_obstructed(tripod_unit):
    findings, artifacts = reports.analyze_scenario("tripod", tripod_unit)
    assert "defect_report" in artifacts
    assert artifacts["defect_report"].verdict == "obstructed"


def test_analyze_polyline_line_consistent():
    sp = mmsot.build_polyline((1.0, 1.0), Fraction(1, 32))
    findings, artifacts = reports.analyze_scenario("polyline", sp)
    assert artifacts["defect_report"].verdict == "line-tangent-consistent"


def test_analyze_fan_concentration_and_map():
    sp = mmsot.build_fan(8)
    findings, _ = reports.analyze_scenario("fan", sp)
    by_title = {f.title: f for f in findings}
    conc = next(f for t, f in by_title.items() if "concentrates" in t)
    assert conc.passed
    mapf = next(f for t, f in by_title.items() if "map" in t)
    assert mapf.passed


def test_analyze_cusp_two_crossing_plans():
    sp = mmsot.build_cusp(Fraction(1, 32))
    findings, artifacts = reports.analyze_scenario("cusp", sp)
    cross = next(f for f in findings if "multiplicity" in f.title)
    assert "2 optimal vertex plan(s)" in cross.detail


def test_analyze_scenario_with_gadget(tripod_unit):
    gadget = mmsot.build_gadget("equidistant_diracs")
    findings, _ = reports.analyze_scenario("tripod", tripod_unit,
                                           gadget=gadget)
    expect = next(f for f in findings if f.title.startswith("expected"))
    assert expect.passed


def test_report_markdown_sections(tripod_unit):
    findings, _ = reports.analyze_scenario("tripod", tripod_unit)
    manifest = {"scenario": "tripod", "parameters": {"h": "1/4"},
                "points": tripod_unit.n, "h": 0.25,
                "total_reference_mass": "3/1", "notes": "test", "seed": 0}
    md = reports.scenario_report_markdown("tripod", manifest, findings,
                                          files=["a.json", "b.csv"])
    assert md.startswith("# Scenario report: tripod")
    assert "| check |" in md
    assert "a.json" in md and "b.csv" in md


def test_svg_plots_deterministic(tmp_path, tripod_unit):
    _, artifacts = reports.analyze_scenario("tripod", tripod_unit)
    rep = artifacts["defect_report"]
    p1, p2 = tmp_path / "one.svg", tmp_path / "two.svg"
    reports.plot_defect_curve(rep, p1)
    reports.plot_defect_curve(rep, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert b"<svg" in p1.read_bytes()


def test_bg_plot_writes_svg(tmp_path, interval_fine):
    _, artifacts = reports.analyze_scenario("interval", interval_fine)
    out = tmp_path / "curve.svg"
    reports.plot_bg_curve(artifacts["bg_curve"], out)
    assert b"<svg" in out.read_bytes()
