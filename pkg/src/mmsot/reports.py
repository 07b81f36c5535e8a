"""Markdown reports and SVG plots for scenario runs.

Plots use the matplotlib Figure API directly (no pyplot state) and a fixed
hash salt, so repeated runs produce stable files.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .curvature import ComparisonProfile, bg_ratio_curve
from .rationals import format_ratio
from .scenarios import (
    GadgetInstance,
    arclength_point,
    fan_atom_ids_by_radius,
    fan_bernoulli_measure,
    fan_segment_ids,
    quantile_subset,
)
from .spaces import DiscreteMeasure
from .tangents import tangent_line_test
from .transport import enumerate_optimal_vertices, is_induced_by_map, product_plan, solve_w2

matplotlib.rcParams["svg.hashsalt"] = "mmsot"

__all__ = [
    "Finding",
    "analyze_gadget",
    "analyze_scenario",
    "scenario_report_markdown",
    "plot_defect_curve",
    "plot_bg_curve",
]


@dataclass(frozen=True)
class Finding:
    """One report line: a named check that passed, failed, or just informs."""

    title: str
    passed: bool | None
    detail: str

    @property
    def status(self) -> str:
        return "info" if self.passed is None else ("PASS" if self.passed else "FAIL")


def analyze_gadget(gadget: GadgetInstance, max_vertices: int = 64) -> list[Finding]:
    """Solve the gadget's transport problem and test its expected phenomenon."""
    plan, w2 = solve_w2(gadget.space, gadget.mu0, gadget.mu1)
    findings = [Finding(
        f"gadget {gadget.name}: optimal value",
        None,
        f"W2^2 = {format_ratio(plan.cost_exact)} = {float(plan.cost_exact)!r}, "
        f"W2 = {w2!r}, margin certificate "
        f"{'holds' if plan.is_certified_optimal else 'missing'}")]
    enum = enumerate_optimal_vertices(gadget.space, gadget.mu0, gadget.mu1,
                                      max_vertices=max_vertices)
    map_flags = [is_induced_by_map(p)[0] for p in enum.plans]
    findings.append(Finding(
        "optimal vertices",
        None,
        f"{len(enum.plans)} vertex plan(s)"
        f"{' (enumeration truncated)' if enum.truncated else ''}; "
        f"{sum(map_flags)} induced by a map"))

    kind = gadget.expected_phenomenon
    if kind in ("no-monge-map", "no-map-to-ac-target"):
        ok = (not enum.truncated) and not any(map_flags)
        findings.append(Finding(
            f"expected: {kind}", ok,
            "no optimal vertex is induced by a map" if ok
            else "a map-induced optimal vertex exists"))
    elif kind == "product-plan-optimal":
        prod = product_plan(gadget.mu0, gadget.mu1)
        ok = prod.cost_exact == plan.cost_exact
        findings.append(Finding(
            f"expected: {kind}", ok,
            f"product plan cost {format_ratio(prod.cost_exact)} "
            f"{'equals' if ok else 'differs from'} the optimum"))
        findings.append(Finding(
            "non-uniqueness", len(enum.plans) > 1,
            f"{len(enum.plans)} optimal vertices"))
    else:
        findings.append(Finding(f"expected: {kind}", None, "no check registered"))
    return findings


def _bg_findings(space, basepoint, radii) -> tuple[list[Finding], object]:
    profile = ComparisonProfile.linear(max(radii))
    curve = bg_ratio_curve(space, basepoint, profile, radii)
    detail = (f"ratios at basepoint {space.point_ids[space.index(basepoint)]}: "
              + ", ".join(f"{r:.4g}" for r in curve.ratios))
    return [Finding("ball growth ratio nonincreasing", curve.nonincreasing,
                    detail)], curve


def _tangent_findings(space, point, schedule, radius=1.0):
    report = tangent_line_test(space, point, schedule, radius=radius)
    fin = Finding(
        f"tangent test at {space.point_ids[space.index(point)]}", None,
        f"verdict: {report.verdict}; min defect "
        f"{report.min_defect if report.min_defect is not None else 'n/a'}")
    return [fin], report


def analyze_scenario(name: str, space, gadget: GadgetInstance | None = None):
    """Scenario-specific checks; returns (findings, artifacts dict).

    Artifacts may contain "defect_report" and "bg_curve" objects for the
    caller to serialize or plot.
    """
    findings: list[Finding] = []
    artifacts: dict = {}

    if gadget is not None:
        findings += analyze_gadget(gadget)

    if name in ("interval", "circle"):
        mid = arclength_point(space, 0.25 if name == "circle" else 0.5)
        radii = [0.45 * (k + 1) / 6 for k in range(6)]
        fs, curve = _bg_findings(space, mid, radii)
        findings += fs
        artifacts["bg_curve"] = curve
    elif name == "polyline":
        point = arclength_point(space, 1.0)
        schedule = [float(2 ** k) for k in range(0, 7)]
        fs, report = _tangent_findings(space, point, schedule)
        findings += fs
        artifacts["defect_report"] = report
    elif name == "tripod":
        schedule = [float(2 ** k) for k in range(0, 7)]
        fs, report = _tangent_findings(space, "hub", schedule)
        findings += fs
        artifacts["defect_report"] = report
    elif name == "fan":
        depth = max(len(lab["bits"]) for lab in space.labels if "bits" in lab)
        coin = fan_bernoulli_measure(space, Fraction(1, 2))
        band = Fraction(0)
        for lab, w in zip(space.labels, coin.exact):
            if w and abs(Fraction(lab["ones"], depth) - Fraction(1, 2)) <= Fraction(3, 10):
                band += w
        findings.append(Finding(
            "coin-flip mass concentrates at mid fan angles",
            band >= Fraction(9, 10),
            f"share with |mean - 1/2| <= 0.3: {format_ratio(band)}"))
        count = min(10, 2 ** depth - 1)
        srcs = quantile_subset(fan_segment_ids(space), count)
        tgts = quantile_subset(fan_atom_ids_by_radius(space), count)
        mu0 = DiscreteMeasure.uniform_on(space, srcs)
        mu1 = DiscreteMeasure.uniform_on(space, tgts)
        plan, _ = solve_w2(space, mu0, mu1)
        induced, _ = is_induced_by_map(plan)
        findings.append(Finding(
            "segment-to-fan optimal plan is a map", induced,
            f"{count} sources onto {count} fan atoms"))
    elif name == "cusp":
        origin = "p0_0"
        schedule = [float(2 ** (k / 2)) for k in range(2, 11)]
        fs, report = _tangent_findings(space, origin, schedule)
        findings += fs
        artifacts["defect_report"] = report
        left = [pid for pid, lab in zip(space.point_ids, space.labels)
                if lab["i"] == -8 and abs(lab["j"]) <= 2]
        right = [pid for pid, lab in zip(space.point_ids, space.labels)
                 if lab["i"] == 8 and abs(lab["j"]) <= 2]
        if len(left) >= 2 and len(right) >= 2:
            mu0 = DiscreteMeasure.uniform_on(space, left[:2])
            mu1 = DiscreteMeasure.uniform_on(space, right[:2])
            enum = enumerate_optimal_vertices(space, mu0, mu1)
            findings.append(Finding(
                "plan multiplicity across the cusp", None,
                f"{len(enum.plans)} optimal vertex plan(s) for a 2x2 crossing"))
    return findings, artifacts


def scenario_report_markdown(name: str, manifest: dict,
                             findings: list[Finding],
                             files: list[str] | None = None) -> str:
    lines = [f"# Scenario report: {name}", ""]
    lines.append("## Build")
    lines.append("")
    for key in sorted(manifest):
        if key == "parameters":
            continue
        lines.append(f"- {key}: {manifest[key]}")
    for key, val in sorted(manifest.get("parameters", {}).items()):
        lines.append(f"- parameter {key}: {val}")
    lines.append("")
    lines.append("## Checks")
    lines.append("")
    lines.append("| status | check | detail |")
    lines.append("|--------|-------|--------|")
    for f in findings:
        lines.append(f"| {f.status} | {f.title} | {f.detail} |")
    if files:
        lines.append("")
        lines.append("## Files")
        lines.append("")
        for fname in files:
            lines.append(f"- `{fname}`")
    lines.append("")
    return "\n".join(lines)


def _new_figure():
    fig = Figure(figsize=(5.0, 3.2), dpi=100)
    FigureCanvasSVG(fig)
    return fig


def _save_svg(fig: Figure, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_defect_curve(report, path) -> None:
    """Defect value against scale, log-x; degenerate scales are hollow."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    scales = [row[0] for row in report.rows]
    defects = [row[1] for row in report.rows]
    degen = [row[2] for row in report.rows]
    ax.plot(scales, defects, color="#1f77b4", lw=1.2, zorder=1)
    for s, d, is_deg in zip(scales, defects, degen):
        ax.plot([s], [d], marker="o", ms=4,
                mfc="white" if is_deg else "#1f77b4", mec="#1f77b4")
    ax.axhline(report.theta_line, color="#2ca02c", lw=0.8, ls="--")
    ax.axhline(report.theta_obstruct, color="#d62728", lw=0.8, ls="--")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("scale")
    ax.set_ylabel("interval defect")
    ax.set_title(f"verdict: {report.verdict}")
    fig.tight_layout()
    _save_svg(fig, path)


def plot_bg_curve(curve, path) -> None:
    """Ball-mass to comparison-profile ratio against radius."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    ax.plot(curve.radii, curve.ratios, color="#1f77b4", lw=1.2, marker="o", ms=4)
    ax.set_xlabel("radius")
    ax.set_ylabel("ball mass / w(r)")
    ax.set_title("nonincreasing" if curve.nonincreasing else "violations found")
    fig.tight_layout()
    _save_svg(fig, path)
