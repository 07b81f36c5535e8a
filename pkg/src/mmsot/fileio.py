"""Serialization: space/measure JSON, plan and report CSV, certificates.

All writers are deterministic (sorted keys, fixed row order, ``repr`` floats,
"\\n" newlines), so re-running a command reproduces files byte for byte.
Exact rationals are serialized as "p/q" strings and parsed back exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .rationals import as_fraction, format_ratio, parse_ratio
from .spaces import DiscreteMeasure, FiniteMetricMeasureSpace

__all__ = [
    "save_space",
    "load_space",
    "space_to_dict",
    "save_measure",
    "load_measure",
    "measure_to_dict",
    "plan_csv_text",
    "save_plan_csv",
    "certificate_dict",
    "save_certificate",
    "geodesic_sidecar_text",
    "defect_csv_text",
    "bg_curve_csv_text",
    "annulus_csv_text",
    "write_text",
]


def _fmt(value) -> str:
    """Serialize one cell: rationals as "p/q", floats via repr, text as-is."""
    if isinstance(value, Fraction):
        return format_ratio(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_weight(raw, where: str) -> Fraction:
    try:
        w = parse_ratio(raw) if isinstance(raw, str) else as_fraction(raw)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{where}: bad number {raw!r}") from exc
    if w < 0:
        raise ValueError(f"{where}: negative weight {raw!r}")
    return w


def write_text(path, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8", newline="\n")
    return p


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

def space_to_dict(space: FiniteMetricMeasureSpace) -> dict:
    """Plain-dict form of a space, with the full distance matrix.

    Labels are kept only when JSON-representable; exact label values
    (Fractions) are serialized as "p/q" strings.
    """
    points = []
    for i, pid in enumerate(space.point_ids):
        entry: dict = {"id": pid, "weight": format_ratio(space.ref_weights_exact[i])}
        lab = space.labels[i] if space.labels is not None else None
        if lab:
            clean = {}
            for k, v in sorted(lab.items()):
                if isinstance(v, Fraction):
                    clean[k] = format_ratio(v)
                elif isinstance(v, (str, int, float, bool)):
                    clean[k] = v
                elif isinstance(v, (tuple, list)) and all(
                        isinstance(x, (int, float)) for x in v):
                    clean[k] = list(v)
            if clean:
                entry["label"] = clean
        points.append(entry)
    out = {"points": points, "dist": [[float(x) for x in row] for row in space.dist]}
    if space.h is not None:
        out["h"] = space.h
    if space.adjacency is not None:
        out["adjacency"] = [[int(a), int(b)] for a, b in space.adjacency]
    return out


def save_space(space: FiniteMetricMeasureSpace, path) -> Path:
    return write_text(path, json.dumps(space_to_dict(space), sort_keys=True,
                                       indent=1) + "\n")


def load_space(path_or_dict) -> FiniteMetricMeasureSpace:
    """Load a space from JSON with either a "dist" matrix or an "edges" list.

    Exactly one of the two must be present.  Edge rows are ``[u, v, length]``
    with point ids and a positive finite length; the metric is then the
    shortest-path distance.  NaN and negative entries are rejected.
    """
    if isinstance(path_or_dict, dict):
        data, where = path_or_dict, "<dict>"
    else:
        where = str(path_or_dict)
        with open(path_or_dict, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{where}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "points" not in data:
        raise ValueError(f"{where}: expected an object with a 'points' list")
    has_dist = "dist" in data
    has_edges = "edges" in data
    if has_dist == has_edges:
        raise ValueError(f"{where}: exactly one of 'dist'/'edges' is required")

    ids, weights, labels = [], [], []
    for k, entry in enumerate(data["points"]):
        if not isinstance(entry, dict) or "id" not in entry:
            raise ValueError(f"{where}: points[{k}] needs an 'id'")
        ids.append(str(entry["id"]))
        weights.append(_parse_weight(entry.get("weight", 0),
                                     f"{where}: points[{k}]"))
        labels.append(dict(entry.get("label", {})))
    if len(set(ids)) != len(ids):
        raise ValueError(f"{where}: duplicate point ids")
    n = len(ids)
    index = {pid: i for i, pid in enumerate(ids)}

    adjacency = None
    if has_dist:
        dist = np.asarray(data["dist"], dtype=float)
        if dist.shape != (n, n):
            raise ValueError(f"{where}: 'dist' must be {n}x{n}")
        if np.isnan(dist).any() or (dist < 0).any():
            raise ValueError(f"{where}: 'dist' contains NaN or negative entries")
        if "adjacency" in data:
            adjacency = [(int(a), int(b)) for a, b in data["adjacency"]]
    else:
        rows, cols, vals = [], [], []
        adjacency = []
        for k, edge in enumerate(data["edges"]):
            try:
                u, v, length = edge
            except (TypeError, ValueError):
                raise ValueError(f"{where}: edges[{k}] must be [u, v, length]")
            length = float(length)
            if math.isnan(length) or length <= 0:
                raise ValueError(f"{where}: edges[{k}] has bad length {length}")
            try:
                a, b = index[str(u)], index[str(v)]
            except KeyError as exc:
                raise ValueError(f"{where}: edges[{k}] references unknown "
                                 f"point {exc.args[0]!r}") from None
            rows += [a, b]
            cols += [b, a]
            vals += [length, length]
            adjacency.append((a, b))
        dist = dijkstra(csr_matrix((vals, (rows, cols)), shape=(n, n)),
                        directed=False)
        if np.isinf(dist).any():
            raise ValueError(f"{where}: edge graph is disconnected")

    return FiniteMetricMeasureSpace(
        ids, dist, weights, labels=labels, h=data.get("h"),
        adjacency=adjacency, check="auto" if n <= 400 else "none")


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def measure_to_dict(measure: DiscreteMeasure) -> dict:
    weights = {measure.space.point_ids[i]: format_ratio(w)
               for i, w in enumerate(measure.exact) if w != 0}
    return {"weights": weights}


def save_measure(measure: DiscreteMeasure, path) -> Path:
    return write_text(path, json.dumps(measure_to_dict(measure), sort_keys=True,
                                       indent=1) + "\n")


def load_measure(path_or_dict, space: FiniteMetricMeasureSpace) -> DiscreteMeasure:
    if isinstance(path_or_dict, dict):
        data, where = path_or_dict, "<dict>"
    else:
        where = str(path_or_dict)
        with open(path_or_dict, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{where}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "weights" not in data:
        raise ValueError(f"{where}: expected an object with a 'weights' map")
    w = [Fraction(0)] * space.n
    for pid, raw in data["weights"].items():
        try:
            i = space.index(pid)
        except KeyError:
            raise ValueError(f"{where}: unknown point id {pid!r}") from None
        w[i] = _parse_weight(raw, f"{where}: weights[{pid!r}]")
    # total mass is not checked here: whether two measures can be coupled is
    # a solver question, not a file-format one
    total = sum(w, Fraction(0))
    return DiscreteMeasure(space, w, probability=(total == 1))


# ---------------------------------------------------------------------------
# plans and certificates
# ---------------------------------------------------------------------------

def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def plan_csv_text(plan) -> str:
    """Support rows "source_id,target_id,mass,squared_cost", exact rationals."""
    ids = plan.space.point_ids
    rows = []
    for p, q, mass in plan.pairs():
        d = as_fraction(plan.space.dist[p, q])
        rows.append([ids[p], ids[q], mass, d * d])
    return _csv_text(["source_id", "target_id", "mass", "squared_cost"], rows)


def save_plan_csv(plan, path) -> Path:
    return write_text(path, plan_csv_text(plan))


def certificate_dict(plan) -> dict:
    """Optimality certificate: value, dual potentials, reduced-cost margin."""
    out = {
        "w2_squared": format_ratio(plan.cost_exact),
        "w2_squared_decimal": float(plan.cost_exact),
        "w2": math.sqrt(float(plan.cost_exact)),
        "certified_optimal": plan.is_certified_optimal,
    }
    if plan.duals is not None:
        ids = plan.space.point_ids
        u, v = plan.duals
        out["dual_source"] = {ids[p]: format_ratio(ui)
                              for p, ui in zip(plan.row_points, u)}
        out["dual_target"] = {ids[q]: format_ratio(vj)
                              for q, vj in zip(plan.col_points, v)}
    if plan.margin_exact is not None:
        out["reduced_cost_margin"] = format_ratio(plan.margin_exact)
    return out


def save_certificate(plan, path) -> Path:
    return write_text(path, json.dumps(certificate_dict(plan), sort_keys=True,
                                       indent=1) + "\n")


def geodesic_sidecar_text(dynamical_plan) -> str:
    """One row per transported path: mass and the ordered point-id list."""
    rows = []
    for path, mass in dynamical_plan.items:
        rows.append([mass, "|".join(path.ids())])
    return _csv_text(["mass", "point_ids"], rows)


# ---------------------------------------------------------------------------
# report tables
# ---------------------------------------------------------------------------

def defect_csv_text(report) -> str:
    """Defect curve rows "lambda,epsilon_hat,verdict" from a tangent report."""
    return _csv_text(["lambda", "epsilon_hat", "verdict"],
                     [list(r) for r in report.csv_rows()])


def bg_curve_csv_text(curve) -> str:
    """Ball-growth rows "r,ball_mass,w,ratio"."""
    return _csv_text(["r", "ball_mass", "w", "ratio"],
                     [list(r) for r in curve.rows()])


def annulus_csv_text(rows) -> str:
    """Annulus/ball mass comparison rows from curvature.annulus_ball_table."""
    return _csv_text(
        ["bin_lo", "bin_hi", "annulus_mass", "ball_y_mass", "ball_z_mass"],
        [list(r) for r in rows])
