"""End-to-end acceptance checks.  Each test records one PASS/FAIL line,
echoed in the pytest terminal summary."""

import itertools
import random
import time
from fractions import Fraction

import pytest

from conftest import random_simple_graph
from tropweier.divisors import RankComputer, reduce, riemann_roch_defect
from tropweier.equidist import ExperimentConfig, pr5_table, report_json, run_experiment
from tropweier.fixtures import circle, dumbbell, full_slope_fixtures, theta
from tropweier.functions import Measure, laplacian
from tropweier.graph import Divisor, Point, canonical_divisor, genus
from tropweier.okounkov import (
    SlopeFamily,
    arithmetic_family,
    elliptic_family,
    fekete_limits,
    genus_two_weierstrass_family,
    ks_uniformity,
    sminmax_gap,
    width_defect,
)
from tropweier.potential import foster_sum, green_function, verify_admissibility, zhang_measure
from tropweier.weierstrass import local_weight, reduce_weierstrass, wronskian_order

RESULTS = {}


def record(k: int, ok: bool, detail: str = "") -> None:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    assert ok, line


def V(name):
    return Point.vertex(name)


@pytest.fixture(scope="module")
def corpus():
    rng = random.Random(1)
    out = []
    while len(out) < 100:
        G = random_simple_graph(rng, 8, 5)
        if genus(G)[1] > 0:
            out.append(G)
    return out


def test_c01_zhang_mass_and_foster(corpus):
    t0 = time.perf_counter()
    bad = 0
    for G in corpus:
        b1, g = genus(G)
        if zhang_measure(G).mass != 1 or foster_sum(G) != b1:
            bad += 1
    dt = time.perf_counter() - t0
    record(1, bad == 0 and dt < 10, f"{len(corpus)} graphs, {bad} failures, {dt:.2f}s (limit 10s)")


def test_c02_canonical_degree(corpus):
    bad = sum(canonical_divisor(G).degree != 2 * genus(G)[1] - 2 for G in corpus)
    record(2, bad == 0, f"{len(corpus)} graphs, {bad} failures")


def test_c03_green_laplacian():
    rng = random.Random(3)
    bad = 0
    for _ in range(50):
        G = random_simple_graph(rng, 6, 4)
        pts = [V(v) for v in G.vertices]
        for e in G.edges:
            pts.append(G.point(e.id, e.length * Fraction(rng.randint(1, 5), 6)))
        z, x = rng.sample(pts, 2)
        lap = laplacian(green_function(G, z, x))
        if lap != Measure(G, {x: 1, z: -1}):
            bad += 1
    record(3, bad == 0, f"50 triples, {bad} failures")


def test_c04_admissibility():
    details = []
    ok = True
    for name, G in (("circle", circle()), ("theta", theta()), ("dumbbell", dumbbell())):
        samples = [V(G.vertices[0]), V(G.vertices[-1])]
        edges = list(G.edges) * 3
        samples += [G.point(e.id, e.length * Fraction(k, 5)) for k, e in zip((1, 2, 3), edges)]
        c, same, values = verify_admissibility(G, canonical_divisor(G), zhang_measure(G), samples)
        ok = ok and same and len(values) == 5
        details.append(f"{name} c={c}")
    record(4, ok, ", ".join(details))


def test_c05_riemann_roch():
    t0 = time.perf_counter()
    count = bad = 0
    for G in (circle(), theta()):
        rc = RankComputer(G)
        for cs in itertools.product(range(-2, 3), repeat=len(G.vertices)):
            D = Divisor({V(v): c for v, c in zip(G.vertices, cs)})
            count += 1
            if riemann_roch_defect(G, D, rc) != 0:
                bad += 1
    dt = time.perf_counter() - t0
    record(5, bad == 0 and dt < 120, f"{count} divisors, {bad} defects, {dt:.1f}s (limit 120s)")


def test_c06_wronskian_order():
    rng = random.Random(6)
    bad = 0
    for _ in range(500):
        r = rng.randint(0, 4)
        s = sorted(rng.sample(range(13), r + 1))
        expected = sum(s) - r * (r + 1) // 2
        if wronskian_order(s) != expected or local_weight(s) != expected:
            bad += 1
    record(6, bad == 0, f"500 sequences, {bad} failures")


def test_c07_weierstrass_degree():
    parts = []
    ok = True
    for name, g, data in full_slope_fixtures():
        deg = reduce_weierstrass(data).degree
        ok = ok and deg == g * (data.r + 1) ** 2
        parts.append(f"{name}={deg}")
    record(7, ok, ", ".join(parts))


def test_c08_pr5():
    t0 = time.perf_counter()
    rows = pr5_table(circle(), Divisor({V("x"): 1}), 200)
    worst = max(abs(row.lhs - row.target) * row.n for row in rows)
    ok = all(abs(row.lhs - row.target) <= Fraction(3, row.n) for row in rows)
    ok = ok and {row.n for row in rows} == set(range(1, 201))
    bridge = [row for row in pr5_table(dumbbell(), Divisor({V("a"): 1}), 200) if row.edge == "br"]
    worst_br = max(abs(row.lhs) * row.n for row in bridge)
    ok = ok and all(row.target == 0 and abs(row.lhs) <= Fraction(6, row.n) for row in bridge)
    dt = time.perf_counter() - t0
    record(
        8,
        ok and dt < 300,
        f"max n|lhs-target| circle={float(worst):.3f} (<=3), bridge={float(worst_br):.3f} (<=6), {dt:.1f}s (limit 300s)",
    )


def _config(name):
    G = {"circle": circle, "theta": theta, "dumbbell": dumbbell}[name]()
    D = Divisor({V("x" if name == "circle" else "a"): 1})
    return ExperimentConfig(
        G, D, 200, measure_ns=(20, 200), mesh=Fraction(1, 32), h=Fraction(1, 4), label=name
    )


@pytest.fixture(scope="module")
def reports():
    return {name: run_experiment(_config(name)) for name in ("circle", "theta", "dumbbell")}


def test_c09_equidistribution_trend(reports):
    ok = True
    parts = []
    for name, rep in reports.items():
        lo = Fraction(rep["measures"]["20"]["osc_phi"])
        hi = Fraction(rep["measures"]["200"]["osc_phi"])
        l1 = Fraction(rep["measures"]["200"]["l1_binned"])
        ratio = lo / hi if hi else None
        ok = ok and hi * 5 <= lo and l1 < Fraction(1, 10)
        parts.append(f"{name}: osc ratio {float(ratio) if ratio else 'inf':.2f}, l1 {float(l1):.4f}")
    record(9, ok, "; ".join(parts))


def _surrogate_family(G, D, x, ns):
    lists = {}
    for n in ns:
        Dv, f = reduce(G, D * n, x)
        s0 = int(f.slope(G.tangent_directions(x)[0]))
        lists[n] = list(range(s0, s0 + Dv.coefficient(x) + 1))
    return SlopeFamily(D.degree, genus(G)[1], lists)


def _decreasing(values):
    return all(a > b for a, b in zip(values, values[1:]))


def test_c10_okounkov(reports):
    checkpoints = (10, 20, 40, 80, 160)
    curve = [elliptic_family(200), genus_two_weierstrass_family(200)]
    G = circle()
    surrogate = _surrogate_family(G, Divisor({G.point("e2", Fraction(1, 2)): 1}), V("x"), range(1, 201))
    width_ok = all(
        abs(width_defect(fam, n)) <= Fraction(2 * fam.g, n) for fam in curve + [surrogate] for n in fam.ns
    )
    width_ok = width_ok and all(
        item["width_ok"] for rep in reports.values() for item in rep["okounkov"].values()
    )
    gap_ok = all(sminmax_gap(arithmetic_family(160), n) == 0 for n in checkpoints)
    for fam in curve + [surrogate]:
        gaps = [abs(sminmax_gap(fam, n)) for n in checkpoints]
        gap_ok = gap_ok and (_decreasing(gaps) or all(q == 0 for q in gaps))
    ks_ok = True
    ks_parts = []
    for name, fam in (("arithmetic", arithmetic_family(160)), ("elliptic", curve[0]), ("genus2", curve[1]), ("surrogate", surrogate)):
        a = fekete_limits(fam).s_min_estimate if name == "surrogate" else (-fam.d if fam.g else 0)
        ks = [ks_uniformity(fam, n, a) for n in checkpoints]
        ks_ok = ks_ok and _decreasing(ks)
        ks_parts.append(f"{name} {float(ks[0]):.3f}->{float(ks[-1]):.4f}")
    record(10, width_ok and gap_ok and ks_ok, f"width {width_ok}, gap trend {gap_ok}, KS " + ", ".join(ks_parts))


def test_c11_determinism(reports):
    again = run_experiment(_config("circle"))
    record(11, report_json(again) == report_json(reports["circle"]), "circle report rerun")
