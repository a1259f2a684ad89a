import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from curvedlink.cli import SUBCOMMANDS, run
from curvedlink.curves import canonical_curve, clifford_torus_knot, make_framing
from curvedlink.errors import NotOnManifold, SchemaError
from curvedlink.io import (Report, curve_from_document, curve_to_document, load_curve, load_field, parse_ref,
                           read_curve_file, report_csv, write_curve_file, write_report)


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def cli_json(*argv):
    code, out, err = cli(*argv)
    assert code == 0, err
    return json.loads(out)


# ---------------------------------------------------------------------------
# files and references


@pytest.mark.parametrize("name", ["trefoil", "exp_torus_knot", "r3_hopf_a"])
def test_curve_file_round_trip(name, tmp_path):
    c = clifford_torus_knot(2, 3, 64) if name == "trefoil" else canonical_curve(name, n=64)
    fr = make_framing(c, "parallel_corrected")
    path = tmp_path / "c.json"
    write_curve_file(c, path, fr)
    back, bfr = read_curve_file(path)
    assert back.tag is c.tag and back.name == c.name
    np.testing.assert_allclose(back.points, c.points, rtol=0, atol=1e-12)
    np.testing.assert_allclose(back.velocity, c.velocity, rtol=0, atol=1e-12)
    np.testing.assert_allclose(bfr.normals, fr.normals, rtol=0, atol=1e-12)


def test_curve_without_velocity_is_differentiated():
    c = canonical_curve("great_circle", n=64)
    doc = curve_to_document(c)
    del doc["velocity"]
    back, fr = curve_from_document(doc)
    assert fr is None
    np.testing.assert_allclose(back.velocity, c.velocity, atol=1e-12)


def test_off_manifold_point_rejected():
    doc = curve_to_document(canonical_curve("great_circle", n=16))
    doc["points"][3] = list(1.1 * np.asarray(doc["points"][3]))
    with pytest.raises(NotOnManifold):
        curve_from_document(doc)


@pytest.mark.parametrize("edit", [
    lambda d: d.pop("space"),
    lambda d: d.update(space="s2"),
    lambda d: d.update(points=d["points"][:3]),
    lambda d: d.update(points=[p[:3] for p in d["points"]]),
    lambda d: d.update(colour="red"),
    lambda d: d.update(framing=d["points"][:5]),
])
def test_schema_violations(edit):
    doc = curve_to_document(canonical_curve("great_circle", n=16))
    edit(doc)
    with pytest.raises(SchemaError):
        curve_from_document(doc)


def test_unreadable_files(tmp_path):
    with pytest.raises(SchemaError):
        read_curve_file(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        read_curve_file(bad)


def test_parse_ref_golden():
    assert parse_ref("canonical:clifford_torus_knot?p=2&q=3") == ("canonical", "clifford_torus_knot",
                                                                   {"p": "2", "q": "3"})
    assert parse_ref("left_invariant", "registry") == ("registry", "left_invariant", {})
    with pytest.raises(SchemaError):
        parse_ref("left_invariant")
    with pytest.raises(SchemaError):
        parse_ref("canonical:")


def test_load_curve_canonical_ref():
    c, fr = load_curve("canonical:clifford_torus_knot?p=2&q=3&n=128")
    ref = clifford_torus_knot(2, 3, 128)
    np.testing.assert_array_equal(c.points, ref.points)
    assert fr is None
    a, _ = load_curve("canonical:hopf_fiber_pair", pick=1)
    np.testing.assert_array_equal(a.points, canonical_curve("hopf_fiber_pair")[1].points)
    with pytest.raises(SchemaError):
        load_curve("canonical:hopf_fiber_pair")
    with pytest.raises(SchemaError):
        load_field("canonical:great_circle")


def test_report_serialisation(tmp_path):
    r = Report("demo", {"a": 1}, {"n": np.int64(4)}, {"v": np.array([1.0, np.nan]), "ok": np.bool_(True)}, 0.5)
    d = json.loads(write_report(r, tmp_path / "r.json"))
    assert d["values"] == {"v": [1.0, None], "ok": True}
    assert d["resolution"] == {"n": 4}
    assert set(d) == {"command", "inputs", "resolution", "values", "integer_gap", "error_estimate", "runtime",
                      "rows"}
    assert json.loads((tmp_path / "r.json").read_text()) == d
    rows = list(csv.reader(io.StringIO(report_csv(r))))
    assert rows[0] == ["key", "value"] and len(rows) == 3


# ---------------------------------------------------------------------------
# command line


def test_cli_link_hopf_pair():
    d = cli_json("link", "--space", "s3", "--format", "parallel", "--curve", "canonical:hopf_a",
                 "--curve2", "canonical:hopf_b", "--samples", "256")
    assert d["command"] == "link"
    assert abs(d["values"]["value"] - 1) < 1e-6
    assert d["integer_gap"] < 1e-6
    assert d["resolution"]["samples"] == [256, 256]


def test_cli_ltw_great_circle_left():
    d = cli_json("ltw", "--space", "s3", "--format", "left", "--curve", "canonical:great_circle",
                 "--framing", "right_j", "--eps", "0.01")
    v = d["values"]
    assert v["lk"] == pytest.approx(1.0, abs=1e-6)
    assert v["tw"] == pytest.approx(0.0, abs=1e-8)
    # the left-format writhe of a great circle is -1 with the literal integrand
    assert v["wr"] == pytest.approx(-1.0, abs=1e-6)
    assert v["length_offset"] == pytest.approx(2.0, abs=1e-12)
    assert v["residual_after_offset"] == pytest.approx(0.0, abs=1e-6)


def test_cli_bounds_h3_volume():
    d = cli_json("bounds", "--space", "h3", "--volume", "10")
    v = d["values"]
    assert v["R"] == pytest.approx(1.21263, abs=1e-5)
    assert v["N"] == pytest.approx(math.sinh(v["R"]), rel=1e-14)
    assert v["curl_eigen_bound"] == pytest.approx(1 / v["N"], rel=1e-14)
    assert v["ball_volume"] == pytest.approx(10.0, rel=1e-12)
    r = cli_json("bounds", "--space", "s3", "--radius", str(math.pi))["values"]
    assert r["N"] == pytest.approx(4 / math.pi, abs=1e-15)


def test_cli_writhe_and_twist():
    w = cli_json("writhe", "--curve", "canonical:great_circle", "--format", "left", "--samples", "64")
    assert w["values"]["value"] == pytest.approx(-1.0, abs=1e-8)
    t = cli_json("twist", "--curve", "canonical:great_circle", "--framing", "right_j", "--format", "parallel")
    assert t["values"]["value"] == pytest.approx(1.0, abs=1e-8)


def test_cli_field_commands():
    grid = ["--grid", "4,8,8"]
    bs = cli_json("bs", "--field", "registry:left_invariant?a=1", "--samples", "2", "--grid", "8,16,16")
    vals, field = np.array(bs["values"]["values"]), np.array(bs["values"]["field"])
    assert vals.shape == (2, 4)
    assert np.linalg.norm(vals + field / 2, axis=1).max() < 5e-2
    at = cli_json("green", "--field", "registry:left_invariant", "--at", "1,0,0,0", *grid)
    assert at["resolution"]["points"] == 1
    mx = cli_json("maxwell-check", "--field", "registry:bump_rotational?space=r3", "--samples", "1",
                  "--grid", "8,8,16")
    assert mx["values"]["max_ampere_relative"] < 5e-2
    h3 = cli_json("maxwell-check", "--field", "registry:bump_rotational?space=h3", "--samples", "1",
                  "--grid", "8,8,16")
    assert h3["inputs"]["space"] == "h3"
    kl = cli_json("keylemma", "--space", "s3", "--samples", "20")
    assert kl["values"]["max_residual"] < 1e-4
    h = cli_json("helicity", "--field", "registry:left_invariant", "--route", "double_integral")
    assert h["values"]["value_over_pi2"] == pytest.approx(-1.0, rel=5e-2)


def test_cli_sweep_csv():
    code, out, _ = cli("sweep", "--quantity", "link", "--curve", "canonical:hopf_a", "--curve2",
                       "canonical:hopf_b", "--sweep", "32,64,128")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["resolution"]) for r in rows] == [32, 64, 128]
    assert all(abs(float(r["value"]) - 1) < 1e-10 for r in rows)
    assert rows[0]["delta"] == "" and float(rows[2]["delta"]) < 1e-10


def test_cli_output_file(tmp_path):
    path = tmp_path / "out.json"
    code, out, _ = cli("bounds", "--radius", "1.0", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["command"] == "bounds"


def test_cli_curve_file(tmp_path):
    path = tmp_path / "k.json"
    k = clifford_torus_knot(2, 3, 128)
    write_curve_file(k, path, make_framing(k, "parallel_corrected"))
    d = cli_json("twist", "--curve", str(path), "--framing", "file")
    assert math.isfinite(d["values"]["value"])


def test_cli_deterministic_except_runtime():
    argv = ("ltw", "--curve", "canonical:clifford_torus_knot?p=2&q=3&n=256", "--eps", "0.02", "--workers", "1")
    a, b = cli_json(*argv), cli_json(*argv[:-1], "3")
    a.pop("runtime"), b.pop("runtime")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


@pytest.mark.parametrize("argv,code", [
    (["link", "--curve", "canonical:hopf_a", "--curve2", "canonical:hopf_a"], 3),
    (["link", "--space", "h3", "--curve", "canonical:hopf_a", "--curve2", "canonical:hopf_b"], 2),
    (["link", "--curve", "canonical:no_such_curve", "--curve2", "canonical:hopf_b"], 2),
    (["link", "--format", "left", "--curve", "canonical:exp_hopf_a", "--curve2", "canonical:exp_hopf_b"], 2),
    (["bounds", "--space", "s3", "--volume", "30"], 2),
    (["bs", "--field", "registry:left_invariant", "--at", "1,1,0,0", "--grid", "4,8,8"], 2),
    (["twist", "--curve", "canonical:great_circle", "--framing", "file"], 2),
    (["keylemma", "--space", "r3"], 2),
    (["maxwell-check", "--space", "r3", "--field", "registry:bump_rotational?space=h3"], 2),
    (["sweep", "--quantity", "link", "--sweep", "8,16"], 2),
    (["frobnicate"], 2),
    (["link", "--curve", "canonical:hopf_a"], 2),
])
def test_cli_exit_codes(argv, code):
    got, out, err = cli(*argv)
    assert got == code
    assert out == ""


def test_cli_error_report_is_json():
    _, _, err = cli("link", "--curve", "canonical:hopf_a", "--curve2", "canonical:hopf_a")
    d = json.loads(err)
    assert d["error"] == "CurvesTooClose" and d["command"] == "link"


def test_every_subcommand_has_help():
    for name in SUBCOMMANDS:
        assert cli(name, "--help")[0] == 0


GOLDEN = sorted((Path(__file__).parent / "golden").glob("*.json"))


def _same(a, b, path="report"):
    if isinstance(a, dict):
        assert isinstance(b, dict) and sorted(a) == sorted(b), f"{path}: keys {sorted(a)} vs {sorted(b)}"
        for k in a:
            _same(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _same(x, y, f"{path}[{i}]")
    elif isinstance(a, float) and not isinstance(b, str):
        assert b == pytest.approx(a, rel=1e-10, abs=1e-10), path
    else:
        assert a == b, path


@pytest.mark.parametrize("path", GOLDEN, ids=lambda p: p.stem)
def test_report_matches_golden_file(path):
    golden = json.loads(path.read_text())
    got = cli_json(*golden["argv"])
    assert "runtime" in got
    got.pop("runtime")
    _same(golden["report"], got)
