import json
from fractions import Fraction

import pytest

from tropweier.equidist import (
    ExperimentConfig,
    binned_l1,
    compare_measures,
    edge_target,
    mu_n,
    pr5_table,
    report_csv,
    report_json,
    run_experiment,
    surrogate_slopes,
)
from tropweier.fixtures import circle, dumbbell, full_slope_fixtures, path, theta
from tropweier.functions import Measure
from tropweier.graph import Divisor, Point, genus, subdivide
from tropweier.potential import zhang_measure
from tropweier.weierstrass import ArcKey, SlopeData, VertexSlopes, midpoint_weierstrass


def V(name):
    return Point.vertex(name)


def test_surrogate_slopes_at_support_are_zero():
    G = circle()
    data = surrogate_slopes(G, Divisor({V("x"): 1}), 5)
    assert all(s == (0,) for s in data.vertices["x"].directions.values())
    assert data.vertices["x"].d_x == 5


def test_surrogate_slopes_three_vertex_circle():
    # circle of length 3 with p at distance 1 from the base q
    G = circle((1, 2))
    p = G.point("e2", 1)
    data = surrogate_slopes(G, Divisor({p: 1}), 2)
    q = data.vertices["x"]
    cx = 2 * q.d_x - sum(s[0] for s in q.directions.values())
    assert cx >= 1
    assert set(data.vertices) == {"x", "y", "e2@1"}
    assert data.r == 1


@pytest.mark.parametrize("G", [circle(), theta(), dumbbell()])
def test_surrogate_consistency(G):
    D = Divisor({V(G.vertices[0]): 1})
    g = genus(G)[1]
    for n in (2, 5, 9):
        data = surrogate_slopes(G, D, n)
        for vs in data.vertices.values():
            c = vs.d_x - sum(s[0] for s in vs.directions.values())
            assert n - g <= c <= n


def test_mu_n_full_fixture_has_mass_one():
    name, g, data = full_slope_fixtures()[0]
    G = circle((1, 1))
    assert mu_n(data, g, G).mass == 1


def test_mu_n_circle_close_to_uniform():
    G = circle()
    ref = subdivide(G, Fraction(1, 4))
    data = surrogate_slopes(ref.graph, Divisor({V("x"): 1}), 50)
    mu = mu_n(data, 1, G, ref)
    assert mu.mass == 1
    # 12 grid vertices, so the uniform share is 1/12
    assert len(mu.atoms) == 12
    assert all(abs(m - Fraction(1, 12)) <= Fraction(1, 50) for m in mu.atoms.values())


def test_mu_n_symmetric_interior_vertex_is_massless():
    # at m the partner slopes cancel: (s0 - s0') / 2 = 0 along both edges
    data = SlopeData(
        3,
        2,
        {
            "x": VertexSlopes("x", 9, 0, {ArcKey("x", "m", "e1"): (-2,), ArcKey("x", "m", "e2"): (2,)}),
            "m": VertexSlopes("m", 0, 0, {ArcKey("m", "x", "e1"): (-2,), ArcKey("m", "x", "e2"): (2,)}),
        },
    )
    assert midpoint_weierstrass(data).coefficient(V("m")) == 0


def test_mu_n_rejects_bad_mass():
    name, g, data = full_slope_fixtures()[0]
    data.vertices["x"].d_x = 10
    with pytest.raises(ValueError):
        mu_n(data, g, circle((1, 1)))


def test_pr5_targets():
    G = circle()
    assert edge_target(G, "e1") == Fraction(1, 3)
    assert edge_target(G, "e2") == Fraction(2, 3)
    assert edge_target(dumbbell(), "br") == 0


def test_pr5_circle_rows():
    rows = pr5_table(circle(), Divisor({V("x"): 1}), 60)
    for row in rows:
        assert abs(row.lhs - row.target) <= Fraction(3, row.n)
        assert row.claim_ok
        assert all(row.ineq_ok.values())


def test_pr5_bridge_rows():
    rows = [r for r in pr5_table(dumbbell(), Divisor({V("a"): 1}), 40) if r.edge == "br"]
    assert all(r.target == 0 for r in rows)
    assert all(Fraction(r.t_n, r.n) == -1 for r in rows)


def test_compare_measures_identity():
    G = theta()
    mu = zhang_measure(G)
    assert compare_measures(mu, mu, G, Fraction(1, 4)) == (0, 0)


def test_compare_measures_path():
    G = path(Fraction(7, 3))
    osc, l1 = compare_measures(Measure.dirac(G, V("x")), Measure.dirac(G, V("y")), G, 1)
    assert osc == Fraction(7, 3)
    assert l1 == 2


def test_compare_measures_circle_uniform_vs_atom():
    G = circle()
    osc, l1 = compare_measures(zhang_measure(G), Measure.dirac(G, V("x")), G, Fraction(1, 4))
    assert osc == Fraction(3, 8)
    assert l1 == 2


def test_compare_measures_symmetric():
    G = theta()
    mu = zhang_measure(G)
    nu = Measure(G, {V("a"): Fraction(1, 2), G.point("p2b", 1): Fraction(1, 2)})
    assert compare_measures(mu, nu, G, Fraction(1, 4)) == compare_measures(nu, mu, G, Fraction(1, 4))


def test_compare_measures_unequal_mass():
    G = path()
    with pytest.raises(ValueError):
        compare_measures(Measure.dirac(G, V("x"), 2), Measure.dirac(G, V("y")), G, 1)


def test_binned_cells_half_open():
    # an atom at a bin boundary counts once, in the bin to its right
    G = path(1)
    mu = Measure.dirac(G, G.point("e", Fraction(1, 2)))
    nu = Measure.dirac(G, G.point("e", Fraction(1, 4)))
    assert binned_l1(G, mu, nu, Fraction(1, 2)) == 2
    assert binned_l1(G, mu, nu, 1) == 0


def test_config_validation():
    G = circle()
    with pytest.raises(ValueError):
        ExperimentConfig(G, Divisor(), 5)
    with pytest.raises(ValueError):
        ExperimentConfig(G, Divisor({V("x"): 1}), 5, mode="explicit")
    with pytest.raises(ValueError):
        ExperimentConfig(G, Divisor({V("x"): 1}), 0)


def test_small_experiment_report():
    G = circle()
    cfg = ExperimentConfig(G, Divisor({V("x"): 1}), 30, mesh=Fraction(1, 8), measure_ns=(3, 30))
    rep = run_experiment(cfg)
    assert rep["mode"] == "tropical-surrogate"
    assert "surrogate" in rep["note"]
    assert rep["verdicts"]["pr5_bound"]
    assert rep["verdicts"]["surrogate_consistency"]
    csv = report_csv(rep).splitlines()
    assert csv[0] == "n,edge,lhs_pr5,target,osc_phi,l1_binned,deg_Wn,mass_err"
    assert len(csv) == 1 + 2 * 30
    json.loads(report_json(rep))


def test_dumbbell_bridge_has_no_interior_mass():
    G = dumbbell()
    cfg = ExperimentConfig(G, Divisor({V("a"): 1}), 24, mesh=Fraction(1, 4), measure_ns=(24,))
    rep = run_experiment(cfg)
    mu = rep["measures"]["24"]["mu_n"]
    bridge = [a for a in mu["atoms"] if a["point"].get("edge") == "br"]
    assert all(Fraction(a["mass"]) == 0 for a in bridge)
    assert all(r["target"] == 0 for r in rep["rows"] if r["edge"] == "br")


def test_explicit_mode_degree():
    name, g, data = full_slope_fixtures()[0]
    G = circle((1, 1))
    cfg = ExperimentConfig(G, Divisor({V("x"): 2}), 1, mode="explicit", slope_files={1: data})
    rep = run_experiment(cfg)
    assert rep["rows"][0]["deg_Wn"] == 4
    assert rep["verdicts"]["weierstrass_degree"]


def test_config_from_json(tmp_path):
    from tropweier.jsonio import divisor_to_json, dumps

    G = circle()
    (tmp_path / "g.json").write_text(dumps(G.to_json()))
    (tmp_path / "d.json").write_text(dumps(divisor_to_json(Divisor({V("x"): 1}))))
    cfg = ExperimentConfig.from_json(
        {"graph": "g.json", "divisor": "d.json", "n_max": 4, "h": "1/2", "mesh": "1/4"}, str(tmp_path)
    )
    assert cfg.graph == G
    assert cfg.h == Fraction(1, 2)
    assert cfg.measure_ns == (4,)
