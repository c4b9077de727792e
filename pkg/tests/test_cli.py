import json
from fractions import Fraction

import pytest

from tropweier.cli import main
from tropweier.fixtures import circle, circle_g12, circle_g12_bad, full_slope_fixtures, theta
from tropweier.graph import Divisor, Point
from tropweier.jsonio import (
    divisor_from_json,
    divisor_to_json,
    dumps,
    graph_from_json,
    measure_from_json,
)
from tropweier.okounkov import elliptic_family
from tropweier.potential import zhang_measure


@pytest.fixture
def files(tmp_path):
    G = theta()
    paths = {}

    def put(name, data):
        p = tmp_path / name
        p.write_text(dumps(data))
        paths[name] = str(p)
        return str(p)

    put("theta.json", G.to_json())
    put("theta_div.json", divisor_to_json(Divisor({Point.vertex("a"): 1, Point.vertex("b"): 1})))
    C, D, S, _ = circle_g12()
    put("c.json", C.to_json())
    put("c_div.json", divisor_to_json(D))
    put("c_slopes.json", S.to_json())
    put("c_bad.json", circle_g12_bad()[2].to_json())
    put("full.json", full_slope_fixtures()[0][2].to_json())
    put("fam.json", elliptic_family(12).to_json())
    G3 = circle()
    put("circle.json", G3.to_json())
    put("circle_div.json", divisor_to_json(Divisor({Point.vertex("x"): 1})))
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_graph_json_roundtrip():
    G = theta()
    assert graph_from_json(json.loads(dumps(G.to_json()))) == G
    assert graph_from_json({"vertices": ["x", "y"], "edges": [{"u": "x", "v": "y", "length": "3/2"}]}).total_length == Fraction(3, 2)


def test_divisor_and_measure_roundtrip():
    G = circle()
    D = Divisor({Point.vertex("x"): -3, G.point("e2", Fraction(1, 2)): 2})
    assert divisor_from_json(G, divisor_to_json(D)) == D
    mu = zhang_measure(G)
    assert measure_from_json(G, mu.to_json()) == mu
    assert divisor_from_json(G, {"coeffs": [{"point": "e2@1/2", "c": 1}]}) == Divisor({G.point("e2", Fraction(1, 2)): 1})


def test_validate(files, capsys):
    code, out = run(capsys, "validate", "--graph", files["theta.json"])
    assert code == 0
    assert json.loads(out) == {"valid": True, "betti": 2, "genus": 2}


def test_validate_simple_rejects_circle(files, capsys):
    code = main(["validate", "--graph", files["circle.json"], "--simple"])
    assert code == 2
    assert "parallel" in capsys.readouterr().err


def test_canonical(files, capsys):
    code, out = run(capsys, "canonical", "--graph", files["theta.json"])
    assert json.loads(out)["degree"] == 2


def test_zhang(files, capsys):
    code, out = run(capsys, "zhang", "--graph", files["circle.json"])
    data = json.loads(out)
    assert {d["density"] for d in data["densities"]} == {"1/3"}


def test_resistance_csv(files, capsys):
    code, out = run(capsys, "resistance", "--graph", files["circle.json"], "--format", "csv")
    assert out.splitlines() == ["a,b,r", "x,y,2/3"]


def test_green(files, capsys):
    code, out = run(capsys, "green", "--graph", files["circle.json"], "--z", "x", "--x", "y", "--y", "y")
    assert json.loads(out) == {"value": "2/3"}


def test_reduce(files, capsys, tmp_path):
    out_path = tmp_path / "red.json"
    code = main(["reduce", "--graph", files["circle.json"], "--divisor", files["circle_div.json"], "--at", "y", "--out", str(out_path)])
    assert code == 0
    data = json.loads(out_path.read_text())
    assert data["reduced"]["coeffs"] == [{"c": 1, "point": {"vertex": "x"}}]


def test_rank(files, capsys):
    code, out = run(capsys, "rank", "--graph", files["theta.json"], "--divisor", files["theta_div.json"])
    assert json.loads(out) == {"rank": 1}


def test_grd_check(files, capsys):
    grid = "e1@1/2,e2@1/2"
    code, out = run(capsys, "grd-check", "--graph", files["c.json"], "--divisor", files["c_div.json"], "--slopes", files["c_slopes.json"], "--grid", grid)
    assert code == 0 and json.loads(out)["grd"]
    code, out = run(capsys, "grd-check", "--graph", files["c.json"], "--divisor", files["c_div.json"], "--slopes", files["c_bad.json"], "--grid", grid)
    assert code == 1 and json.loads(out)["failures"]


def test_weierstrass(files, capsys):
    code, out = run(capsys, "weierstrass", "--slopes", files["full.json"])
    data = json.loads(out)
    assert data["degree"] == 4 and data["mode"] == "full"


def test_okounkov(files, capsys):
    code, out = run(capsys, "okounkov", "--slopes", files["fam.json"], "--n-max", "4")
    data = json.loads(out)
    assert data["fekete"]["s_min_estimate"] == -1
    assert [r["n"] for r in data["rows"]] == [1, 2, 3, 4]


def test_equidist_exit_code_and_csv(files, capsys):
    code, out = run(
        capsys, "equidist", "--graph", files["circle.json"], "--divisor", files["circle_div.json"],
        "--n-max", "12", "--measure-ns", "3,12", "--mesh", "1/8", "--format", "csv",
    )
    assert out.splitlines()[0] == "n,edge,lhs_pr5,target,osc_phi,l1_binned,deg_Wn,mass_err"
    assert code in (0, 1)


def test_equidist_config(files, capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"graph": "circle.json", "divisor": "circle_div.json", "n_max": 6, "mesh": "1/4", "measure_ns": [6]}))
    code, out = run(capsys, "equidist", "--config", str(cfg))
    assert json.loads(out)["n_range"] == [1, 6]


def test_missing_required_flag(capsys):
    with pytest.raises(SystemExit):
        main(["zhang"])
