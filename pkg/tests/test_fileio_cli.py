import json
from fractions import Fraction

import numpy as np
import pytest

import mmsot
from mmsot import cli, fileio

from conftest import line_space


def test_space_json_roundtrip(tmp_path, tripod_unit):
    path = tmp_path / "tripod.json"
    fileio.save_space(tripod_unit, path)
    back = fileio.load_space(path)
    assert back.point_ids == tripod_unit.point_ids
    assert np.array_equal(back.dist, tripod_unit.dist)
    assert back.ref_weights_exact == tripod_unit.ref_weights_exact
    assert back.h == tripod_unit.h


def test_space_from_edges():
    back = fileio.load_space({
        "points": [{"id": "a", "weight": "1/2"},
                   {"id": "b", "weight": "1/4"},
                   {"id": "c", "weight": "1/4"}],
        "edges": [["a", "b", 1.0], ["b", "c", 0.5]],
    })
    assert back.dist[back.index("a"), back.index("c")] == pytest.approx(1.5)
    assert back.ref_weights_exact[back.index("a")] == Fraction(1, 2)


def test_space_load_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError, match="exactly one"):
        fileio.load_space({"points": [{"id": "a", "weight": 1}]})
    with pytest.raises(ValueError, match="exactly one"):
        fileio.load_space({"points": [{"id": "a", "weight": 1}],
                           "dist": [[0.0]], "edges": []})
    with pytest.raises(ValueError):
        fileio.load_space({"points": [{"id": "a", "weight": 1},
                                      {"id": "b", "weight": 1}],
                           "dist": [[0.0, float("nan")], [1.0, 0.0]]})
    with pytest.raises(ValueError):
        fileio.load_space({"points": [{"id": "a", "weight": 1},
                                      {"id": "b", "weight": 1}],
                           "dist": [[0.0, -1.0], [-1.0, 0.0]]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValueError, match="line 1"):
        fileio.load_space(bad)


def test_space_from_edges_rejects_disconnected():
    with pytest.raises(ValueError, match="disconnected"):
        fileio.load_space({
            "points": [{"id": "a", "weight": 1}, {"id": "b", "weight": 1},
                       {"id": "c", "weight": 1}, {"id": "d", "weight": 1}],
            "edges": [["a", "b", 1.0], ["c", "d", 1.0]],
        })


def test_measure_roundtrip(tmp_path, tripod_unit):
    mu = mmsot.DiscreteMeasure.uniform_on(tripod_unit, ["A1", "B2", "C3"])
    path = tmp_path / "mu.json"
    fileio.save_measure(mu, path)
    back = fileio.load_measure(path, tripod_unit)
    assert back.exact == mu.exact


def test_measure_unknown_point(tripod_unit):
    with pytest.raises(ValueError, match="unknown"):
        fileio.load_measure({"weights": {"Z9": "1"}}, tripod_unit)


def test_measure_negative_weight(tripod_unit):
    with pytest.raises(ValueError):
        fileio.load_measure({"weights": {"A1": "-1/2", "A2": "3/2"}},
                            tripod_unit)


def test_plan_csv_exact_rationals():
    sp = line_space([0, 1, 4, 5])
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    text = fileio.plan_csv_text(plan)
    lines = text.strip().splitlines()
    assert lines[0] == "source_id,target_id,mass,squared_cost"
    assert "x0,x2,1/2,16/1" in lines
    assert "x1,x3,1/2,16/1" in lines


def test_certificate_contents():
    sp = line_space([0, 1, 4, 5])
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    plan, _ = mmsot.solve_w2(sp, mu0, mu1)
    cert = fileio.certificate_dict(plan)
    assert cert["w2_squared"] == "16/1"
    assert cert["certified_optimal"] is True
    assert set(cert["dual_source"]) == {"x0", "x1"}
    assert set(cert["dual_target"]) == {"x2", "x3"}
    assert Fraction(cert["reduced_cost_margin"]) >= 0


def test_geodesic_sidecar(tripod_unit):
    mu0 = mmsot.DiscreteMeasure.dirac(tripod_unit, "A2")
    mu1 = mmsot.DiscreteMeasure.dirac(tripod_unit, "B2")
    plan, _ = mmsot.solve_w2(tripod_unit, mu0, mu1)
    dyn = mmsot.lift_to_dynamical(tripod_unit, plan)
    text = fileio.geodesic_sidecar_text(dyn)
    assert "A2|A1|hub|B1|B2" in text


def write_instance(tmp_path):
    sp = line_space([0, 1, 4, 5])
    fileio.save_space(sp, tmp_path / "space.json")
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    fileio.save_measure(mu0, tmp_path / "mu0.json")
    fileio.save_measure(mu1, tmp_path / "mu1.json")
    return sp


def test_cli_solve_writes_artifacts(tmp_path, capsys):
    write_instance(tmp_path)
    code = cli.main(["--out", str(tmp_path), "solve",
                     str(tmp_path / "space.json"),
                     str(tmp_path / "mu0.json"),
                     str(tmp_path / "mu1.json")])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "W2^2 = 16/1 = 16.0" in out
    assert (tmp_path / "plan.csv").exists()
    cert = json.loads((tmp_path / "plan.certificate.json").read_text())
    assert cert["w2_squared"] == "16/1"


def test_cli_solve_deterministic_bytes(tmp_path):
    write_instance(tmp_path)
    argv = ["--out", str(tmp_path), "solve", str(tmp_path / "space.json"),
            str(tmp_path / "mu0.json"), str(tmp_path / "mu1.json")]
    assert cli.main(argv) == cli.EXIT_OK
    first = (tmp_path / "plan.csv").read_bytes()
    first_cert = (tmp_path / "plan.certificate.json").read_bytes()
    assert cli.main(argv) == cli.EXIT_OK
    assert (tmp_path / "plan.csv").read_bytes() == first
    assert (tmp_path / "plan.certificate.json").read_bytes() == first_cert


def test_cli_solve_infeasible_exit(tmp_path, capsys):
    sp = write_instance(tmp_path)
    half = mmsot.DiscreteMeasure(
        sp, [Fraction(1, 4), Fraction(1, 4), 0, 0], probability=False)
    fileio.save_measure(half, tmp_path / "half.json")
    code = cli.main(["--out", str(tmp_path), "solve",
                     str(tmp_path / "space.json"),
                     str(tmp_path / "half.json"),
                     str(tmp_path / "mu1.json")])
    assert code == cli.EXIT_INFEASIBLE
    assert "error" in capsys.readouterr().err


def test_cli_solve_parse_error(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{"points": [', encoding="utf-8")
    code = cli.main(["solve", str(bad), str(bad), str(bad)])
    assert code == cli.EXIT_PARSE


def test_cli_scenario_unknown_name(tmp_path, capsys):
    assert cli.main(["--out", str(tmp_path), "scenario", "sphere"]) \
        == cli.EXIT_UNKNOWN_SCENARIO


def test_cli_scenario_stray_parameter(tmp_path, capsys):
    assert cli.main(["--out", str(tmp_path), "scenario", "interval",
                     "--depth", "3"]) == cli.EXIT_PARSE


def test_cli_scenario_tripod_with_gadget(tmp_path, capsys):
    code = cli.main(["--out", str(tmp_path), "scenario", "tripod",
                     "--gadget", "two_branch_segments"])
    assert code == cli.EXIT_OK
    assert (tmp_path / "tripod.manifest.json").exists()
    assert (tmp_path / "tripod.space.json").exists()
    report = (tmp_path / "tripod.report.md").read_text()
    assert "two_branch_segments" in report
    out = capsys.readouterr().out
    assert "[PASS]" in out


def test_cli_scenario_interval_plots(tmp_path, capsys):
    code = cli.main(["--out", str(tmp_path), "scenario", "interval",
                     "--h", "1/16", "--plots"])
    assert code == cli.EXIT_OK
    assert (tmp_path / "interval.bg.csv").exists()
    svg = (tmp_path / "interval.bg.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_cli_tangent_happy_and_bad_point(tmp_path, capsys):
    sp = mmsot.build_tripod((1.0, 1.0, 1.0), Fraction(1, 4))
    fileio.save_space(sp, tmp_path / "tri.json")
    code = cli.main(["--out", str(tmp_path), "tangent",
                     str(tmp_path / "tri.json"), "hub",
                     "--schedule", "1,2,4"])
    assert code == cli.EXIT_OK
    assert "verdict: obstructed" in capsys.readouterr().out
    assert (tmp_path / "defect.csv").exists()

    code = cli.main(["--out", str(tmp_path), "tangent",
                     str(tmp_path / "tri.json"), "Q7"])
    assert code == cli.EXIT_BAD_POINT


def test_cli_curvature(tmp_path, capsys):
    sp = mmsot.build_interval(1.0, Fraction(1, 32))
    fileio.save_space(sp, tmp_path / "seg.json")
    code = cli.main(["--out", str(tmp_path), "curvature",
                     str(tmp_path / "seg.json"), "s16",
                     "--radii", "0.1,0.2,0.3,0.4"])
    assert code == cli.EXIT_OK
    assert "nonincreasing" in capsys.readouterr().out
    assert (tmp_path / "bg.csv").exists()


def test_cli_gh_exact_and_heuristic(tmp_path, capsys):
    a = line_space([0, 1, 2])
    b = line_space([0, 1, 2, 3])
    big = mmsot.build_interval(1.0, Fraction(1, 16))
    fileio.save_space(a, tmp_path / "a.json")
    fileio.save_space(b, tmp_path / "b.json")
    fileio.save_space(big, tmp_path / "big.json")

    assert cli.main(["gh", str(tmp_path / "a.json"),
                     str(tmp_path / "b.json")]) == cli.EXIT_OK
    assert "exact search" in capsys.readouterr().out

    assert cli.main(["gh", str(tmp_path / "a.json"), str(tmp_path / "big.json"),
                     "--restarts", "8"]) == cli.EXIT_OK
    assert "upper bound" in capsys.readouterr().out


def test_cli_bad_flag_is_parse_error(capsys):
    assert cli.main(["solve", "--no-such-flag"]) == cli.EXIT_PARSE


def test_cli_out_dir_env(tmp_path, capsys, monkeypatch):
    sp = line_space([0, 1, 4, 5])
    fileio.save_space(sp, tmp_path / "space.json")
    mu0 = mmsot.DiscreteMeasure.uniform_on(sp, ["x0", "x1"])
    mu1 = mmsot.DiscreteMeasure.uniform_on(sp, ["x2", "x3"])
    fileio.save_measure(mu0, tmp_path / "mu0.json")
    fileio.save_measure(mu1, tmp_path / "mu1.json")
    target = tmp_path / "envout"
    target.mkdir()
    monkeypatch.setenv("MMSOT_OUT", str(target))
    code = cli.main(["solve", str(tmp_path / "space.json"),
                     str(tmp_path / "mu0.json"), str(tmp_path / "mu1.json")])
    assert code == cli.EXIT_OK
    assert (target / "plan.csv").exists()
