"""Command line surface: ``mmsot solve|scenario|tangent|curvature|gh``.

Exit codes partition the failure modes: 0 success, 2 parse/usage error,
3 infeasible marginals, 4 unknown scenario or gadget, 5 bad point reference.
Output files land in --out, else $MMSOT_OUT, else the working directory;
every command is deterministic, so re-runs reproduce CSV files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import fileio, reports
from .curvature import ComparisonProfile, bg_ratio_curve
from .rationals import format_ratio, parse_ratio
from .scenarios import (
    GADGET_NAMES,
    SCENARIO_NAMES,
    ScenarioSpec,
    build_gadget,
    build_scenario,
)
from .tangents import gh_defect_heuristic, gh_distance_exact, tangent_line_test
from .transport import InfeasibleMarginals, is_induced_by_map, solve_w2

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_UNKNOWN_SCENARIO = 4
EXIT_BAD_POINT = 5

_SCENARIO_FLAGS = {
    "interval": ("length", "h"),
    "circle": ("circumference", "h"),
    "polyline": ("lengths", "h"),
    "tripod": ("leg_lengths", "h"),
    "fan": ("depth", "segment_h"),
    "cusp": ("grid_h",),
}


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("MMSOT_OUT") or "."
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _ratio_list(text: str):
    return [parse_ratio(part) for part in text.split(",") if part.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmsot",
        description="Exact quadratic transport on finite metric measure spaces.")
    parser.add_argument("--out", help="output directory (default: $MMSOT_OUT or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve W2^2 between two measures")
    p.add_argument("space_file")
    p.add_argument("mu0_file")
    p.add_argument("mu1_file")
    p.add_argument("--prefix", default="plan", help="basename for output files")

    p = sub.add_parser("scenario", help="build a named scenario and report on it")
    p.add_argument("name")
    p.add_argument("--h", help="grid step, e.g. 1/16")
    p.add_argument("--length", help="interval length")
    p.add_argument("--circumference", help="circle circumference")
    p.add_argument("--lengths", help="comma list of polyline segment lengths")
    p.add_argument("--legs", help="comma list of three tripod leg lengths")
    p.add_argument("--depth", type=int, help="fan bit depth")
    p.add_argument("--segment-h", dest="segment_h", help="fan segment step")
    p.add_argument("--grid", dest="grid_h", help="cusp grid step, e.g. 1/32")
    p.add_argument("--gadget", help="also run a named transport gadget: "
                                    + ", ".join(GADGET_NAMES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plots", action="store_true", help="emit SVG plots")
    p.add_argument("--emit-space", action="store_true",
                   help="write the space JSON even when it is large")

    p = sub.add_parser("tangent", help="rescaled-ball line-likeness test")
    p.add_argument("space_file")
    p.add_argument("point")
    p.add_argument("--schedule", default="1,2,4,8,16,32,64",
                   help="comma list of increasing scales")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--prefix", default="defect")

    p = sub.add_parser("curvature", help="ball growth ratio against a profile")
    p.add_argument("space_file")
    p.add_argument("point")
    p.add_argument("--profile", default="linear",
                   help='"linear" or "constant=VALUE"')
    p.add_argument("--radii", help="comma list of increasing radii")
    p.add_argument("--prefix", default="bg")

    p = sub.add_parser("gh", help="distance between two small spaces")
    p.add_argument("space_a")
    p.add_argument("space_b")
    p.add_argument("--restarts", type=int, default=64,
                   help="heuristic restarts when a space exceeds 7 points")
    return parser


def _cmd_solve(args) -> int:
    try:
        space = fileio.load_space(args.space_file)
        mu0 = fileio.load_measure(args.mu0_file, space)
        mu1 = fileio.load_measure(args.mu1_file, space)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        plan, w2 = solve_w2(space, mu0, mu1)
    except InfeasibleMarginals as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    out = _out_dir(args)
    plan_path = fileio.save_plan_csv(plan, out / f"{args.prefix}.csv")
    cert_path = fileio.save_certificate(plan, out / f"{args.prefix}.certificate.json")
    induced, _ = is_induced_by_map(plan)
    print(f"W2^2 = {format_ratio(plan.cost_exact)} = {float(plan.cost_exact)!r}")
    print(f"W2 = {w2!r}")
    print("plan is induced by a map" if induced
          else "plan is not induced by a map")
    print(f"wrote {plan_path} and {cert_path}")
    return EXIT_OK


def _cmd_scenario(args) -> int:
    if args.name not in SCENARIO_NAMES:
        print(f"error: unknown scenario {args.name!r}; choose from "
              f"{', '.join(SCENARIO_NAMES)}", file=sys.stderr)
        return EXIT_UNKNOWN_SCENARIO
    params = {}
    try:
        if args.h is not None:
            params["h"] = parse_ratio(args.h)
        if args.length is not None:
            params["length"] = parse_ratio(args.length)
        if args.circumference is not None:
            params["circumference"] = parse_ratio(args.circumference)
        if args.lengths is not None:
            params["lengths"] = tuple(_ratio_list(args.lengths))
        if args.legs is not None:
            params["leg_lengths"] = tuple(_ratio_list(args.legs))
        if args.depth is not None:
            params["depth"] = args.depth
        if args.segment_h is not None:
            params["segment_h"] = parse_ratio(args.segment_h)
        if args.grid_h is not None:
            params["grid_h"] = parse_ratio(args.grid_h)
        allowed = _SCENARIO_FLAGS[args.name]
        stray = sorted(set(params) - set(allowed))
        if stray:
            raise ValueError(f"parameter(s) {', '.join(stray)} do not apply to "
                             f"scenario {args.name!r}")
        space, manifest = build_scenario(
            ScenarioSpec.of(args.name, seed=args.seed, **params))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    gadget = None
    if args.gadget is not None:
        if args.gadget not in GADGET_NAMES:
            print(f"error: unknown gadget {args.gadget!r}; choose from "
                  f"{', '.join(GADGET_NAMES)}", file=sys.stderr)
            return EXIT_UNKNOWN_SCENARIO
        gadget = build_gadget(args.gadget)

    out = _out_dir(args)
    files: list[str] = []
    manifest_path = fileio.write_text(
        out / f"{args.name}.manifest.json",
        json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    files.append(manifest_path.name)

    if space.n <= 1000 or args.emit_space:
        files.append(fileio.save_space(space, out / f"{args.name}.space.json").name)

    findings, artifacts = reports.analyze_scenario(args.name, space, gadget=gadget)
    if "defect_report" in artifacts:
        rep = artifacts["defect_report"]
        files.append(fileio.write_text(out / f"{args.name}.defect.csv",
                                       fileio.defect_csv_text(rep)).name)
        if args.plots:
            svg = out / f"{args.name}.defect.svg"
            reports.plot_defect_curve(rep, svg)
            files.append(svg.name)
    if "bg_curve" in artifacts:
        curve = artifacts["bg_curve"]
        files.append(fileio.write_text(out / f"{args.name}.bg.csv",
                                       fileio.bg_curve_csv_text(curve)).name)
        if args.plots:
            svg = out / f"{args.name}.bg.svg"
            reports.plot_bg_curve(curve, svg)
            files.append(svg.name)

    md = reports.scenario_report_markdown(args.name, manifest, findings,
                                          files=files)
    report_path = fileio.write_text(out / f"{args.name}.report.md", md)
    for f in findings:
        print(f"[{f.status}] {f.title}: {f.detail}")
    print(f"wrote {report_path}")
    return EXIT_OK


def _cmd_tangent(args) -> int:
    try:
        space = fileio.load_space(args.space_file)
        schedule = [float(x) for x in _ratio_list(args.schedule)]
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        space.index(args.point)
    except KeyError:
        print(f"error: point {args.point!r} not in the space", file=sys.stderr)
        return EXIT_BAD_POINT
    try:
        report = tangent_line_test(space, args.point, schedule,
                                   radius=args.radius)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out = _out_dir(args)
    path = fileio.write_text(out / f"{args.prefix}.csv",
                             fileio.defect_csv_text(report))
    for scale, defect, degenerate in report.rows:
        flag = " (degenerate)" if degenerate else ""
        print(f"scale {scale:g}: defect {defect:.6g}{flag}")
    print(f"verdict: {report.verdict}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_curvature(args) -> int:
    try:
        space = fileio.load_space(args.space_file)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        center = space.index(args.point)
    except KeyError:
        print(f"error: point {args.point!r} not in the space", file=sys.stderr)
        return EXIT_BAD_POINT
    try:
        if args.radii is not None:
            radii = [float(x) for x in _ratio_list(args.radii)]
        else:
            rmax = 0.5 * float(space.dist.max())
            radii = [rmax * (k + 1) / 8 for k in range(8)]
        rtop = max(radii)
        if args.profile == "linear":
            profile = ComparisonProfile.linear(rtop)
        elif args.profile.startswith("constant="):
            profile = ComparisonProfile.constant(
                float(parse_ratio(args.profile.split("=", 1)[1])), rtop)
        else:
            raise ValueError(f"unknown profile {args.profile!r}")
        curve = bg_ratio_curve(space, center, profile, radii)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out = _out_dir(args)
    path = fileio.write_text(out / f"{args.prefix}.csv",
                             fileio.bg_curve_csv_text(curve))
    print("ratio curve is nonincreasing" if curve.nonincreasing
          else f"ratio curve increases at steps {sorted(set(v[0] for v in curve.violations))}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_gh(args) -> int:
    try:
        a = fileio.load_space(args.space_a)
        b = fileio.load_space(args.space_b)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if a.n <= 7 and b.n <= 7:
        value, corr = gh_distance_exact(a, b)
        print(f"gh_distance = {float(value)!r} (exact search, distortion "
              f"{float(corr.distortion)!r})")
    else:
        value, _ = gh_defect_heuristic(a, b, restarts=args.restarts)
        print(f"gh_defect <= {float(value)!r} (heuristic upper bound; a space "
              f"exceeds 7 points)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    handlers = {
        "solve": _cmd_solve,
        "scenario": _cmd_scenario,
        "tangent": _cmd_tangent,
        "curvature": _cmd_curvature,
        "gh": _cmd_gh,
    }
    return handlers[args.command](args)


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
