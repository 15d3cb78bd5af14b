import json

import numpy as np
import pytest

from diracgeom import cli, correspondence as co, group_geometry as gg, quadratic_lie as ql


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json", "-", "--no-timestamp")
    return code, json.loads(out)


def test_verify_passes_and_schema(capsys):
    code, doc = report(capsys, "verify", "--group", "so3", "--samples", "5", "--seed", "3")
    assert code == 0
    assert doc["tool"] == "diracgeom" and doc["command"] == "verify" and doc["group"] == "so3"
    assert doc["summary"]["failed"] == 0 and doc["summary"]["total"] == len(doc["records"])
    assert "timestamp" not in doc
    for r in doc["records"]:
        assert set(r) >= {"name", "point", "residual", "tolerance", "pass", "anchor"}
        assert r["pass"] and r["residual"] <= r["tolerance"]


@pytest.mark.parametrize("group", ["su2", "sl2r"])
def test_verify_other_groups(capsys, group):
    code, doc = report(capsys, "verify", "--group", group, "--samples", "4")
    assert code == 0 and doc["summary"]["failed"] == 0


def test_verify_deterministic(capsys):
    args = ("verify", "--group", "so3", "--seed", "42", "--samples", "6")
    a = run(capsys, *args, "--json", "-", "--no-timestamp")
    b = run(capsys, *args, "--json", "-", "--no-timestamp")
    assert a == b
    code, doc = report(capsys, "verify", "--group", "so3", "--seed", "43", "--samples", "6")
    assert json.loads(a[1])["records"][0]["point"] != doc["records"][0]["point"]


def test_timestamp_present_by_default(capsys):
    code, out, _ = run(capsys, "algebra", "--group", "so3", "--json", "-")
    assert "timestamp" in json.loads(out)


def test_text_lines(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "3")
    lines = out.strip().splitlines()
    assert code == 0 and lines[-1].startswith("summary: ")
    assert all(l.startswith("PASS ") for l in lines[:-1])


def test_tiny_tolerance_fails(capsys):
    code, doc = report(capsys, "verify", "--samples", "3", "--tol", "1e-30")
    assert code == 1 and doc["summary"]["failed"] > 0


def test_usage_errors(capsys):
    assert run(capsys, "verify", "--group", "e8")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "verify", "--samples", "-1")[0] == 2
    assert run(capsys, "class-report", "--point", "[1, 2")[0] == 2
    assert run(capsys, "invert", "--input", "/nonexistent/file.json")[0] == 2


def test_bad_realization_input(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"group": "so3", "dJ": [[1.0]]}')
    code, _, err = run(capsys, "invert", "--input", str(f))
    assert code == 2 and "schema" in err
    f.write_text("not json")
    assert run(capsys, "invert", "--input", str(f))[0] == 2


def test_invert_roundtrip_and_files(capsys, tmp_path):
    code, doc = report(capsys, "invert", "--group", "so3", "--synthetic", "2", "--seed", "5")
    assert code == 0 and doc["summary"]["failed"] == 0
    names = {r["name"] for r in doc["records"]}
    assert "roundtrip:quasi->dirac->quasi" in names
    # quasi data -> Dirac file -> quasi data reproduces the input
    src = tmp_path / "p.json"
    p = co.synth_realization(5, "sl2r")
    src.write_text(co.to_json(p))
    out = tmp_path / "L.json"
    assert run(capsys, "invert", "--input", str(src), "--direction", "to-dirac", "--out", str(out))[0] == 0
    back = tmp_path / "q.json"
    assert run(capsys, "invert", "--input", str(out), "--direction", "to-quasi", "--out", str(back))[0] == 0
    q = co.from_json(back.read_text())
    assert np.allclose(q.pi, p.pi, atol=1e-8) and np.allclose(q.rho_M, p.rho_M, atol=1e-8)


def test_invert_wrong_direction_input(capsys, tmp_path):
    src = tmp_path / "p.json"
    src.write_text(co.to_json(co.synth_realization(1, "so3")))
    assert run(capsys, "invert", "--input", str(src), "--direction", "to-quasi")[0] == 2


def test_invert_invalid_data_fails(capsys, tmp_path):
    p = co.synth_realization(1, "so3")
    q = co.RealizationPoint(p.g, p.dJ, pi=p.pi, rho_M=p.rho_M + 0.2)
    src = tmp_path / "p.json"
    src.write_text(co.to_json(q))
    code, doc = report(capsys, "invert", "--input", str(src), "--direction", "to-dirac")
    assert code == 1
    assert any(r["name"].startswith("quasi_invariant:") and not r["pass"] for r in doc["records"])


def test_class_report(capsys):
    code, doc = report(capsys, "class-report", "--group", "so3", "--samples", "3")
    assert code == 0
    names = {r["name"] for r in doc["records"]}
    assert names == {"leaf_form_vs_ghjw", "d_theta_twist", "d_theta_twist_fd"}


def test_class_report_degeneracy_flag(capsys):
    _, doc = report(capsys, "class-report", "--group", "so3", "--angle", str(np.pi))
    det = doc["records"][0]["detail"]
    assert det["degenerate"] and abs(det["det_ad_plus_one"]) <= 1e-10
    _, doc = report(capsys, "class-report", "--group", "so3", "--angle", "2.0")
    assert not doc["records"][0]["detail"]["degenerate"]


def test_class_report_point(capsys):
    g = gg.GroupPoint(gg.make_group("so3"), gg.rot_z(0.3))
    code, doc = report(capsys, "class-report", "--point", json.dumps(g.tolist()))
    assert code == 0 and len(doc["records"]) == 3


def test_groupoid(capsys):
    code, doc = report(capsys, "groupoid", "--group", "so3", "--samples", "4")
    assert code == 0
    names = {r["name"] for r in doc["records"]}
    assert names == {"groupoid_axioms", "multiplicativity", "closure", "kernel_condition", "im_of_omega",
                     "action_compat"}


def test_groupoid_sl2r_and_deep(capsys):
    code, doc = report(capsys, "groupoid", "--group", "sl2r", "--samples", "5", "--deep", "2")
    assert code == 0
    assert sum(r["name"] == "closure" for r in doc["records"]) == 2


def test_groupoid_ablation_fails(capsys):
    code, doc = report(capsys, "groupoid", "--samples", "3", "--ablate")
    assert code == 1
    bad = {r["name"] for r in doc["records"] if not r["pass"]}
    assert "multiplicativity" in bad and "closure" in bad


def test_reduce(capsys):
    code, doc = report(capsys, "reduce", "--group", "so3", "--samples", "3", "--angle", "1.2")
    assert code == 0
    assert len(doc["payload"]["reduced"]) == 3
    assert all(r["isotropy_dim"] == 1 for r in doc["payload"]["reduced"])


def test_reduce_input_file(capsys, tmp_path):
    src = tmp_path / "p.json"
    src.write_text(co.to_json(co.synth_realization(2, "su2", k=3)))
    code, doc = report(capsys, "reduce", "--input", str(src))
    assert code == 0 and doc["group"] == "su2"


def test_algebra(capsys, tmp_path):
    code, doc = report(capsys, "algebra", "--group", "sl2r")
    assert code == 0 and ql.load(json.dumps(doc["payload"])).dim == 3
    f = tmp_path / "alg.json"
    bad = json.loads(ql.save(ql.builtin("so3")))
    bad["form"] = [[1, 0], [0, 1]]
    f.write_text(json.dumps(bad))
    assert run(capsys, "algebra", "--input", str(f))[0] == 2


def test_json_file_and_stdout_lines(capsys, tmp_path):
    f = tmp_path / "r.json"
    code, out, _ = run(capsys, "algebra", "--json", str(f), "--no-timestamp")
    assert code == 0 and out.strip().endswith("0 failed")
    assert json.loads(f.read_text())["command"] == "algebra"


def test_dumps_format():
    assert cli.dumps({"b": 1, "a": [0.1, True, None, np.float64(2.5)]}) == '{"a": [0.10000000000000001, true, null, 2.5], "b": 1}'
    assert cli.dumps(float("inf")) == "Infinity"
