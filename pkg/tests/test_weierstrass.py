
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from tropweier.equidist import surrogate_slopes
from tropweier.fixtures import circle, full_slope_fixtures
from tropweier.graph import Divisor, Point
from tropweier.weierstrass import (
    ArcKey,
    SlopeData,
    SlopeDataError,
    VertexSlopes,
    coefficient,
    local_weight,
    midpoint_weierstrass,
    reduce_weierstrass,
    total_weight_checks,
    wronskian,
    wronskian_order,
)


def sympy_wronskian_order(s):
    t = sympy.symbols("t")
    W = sympy.wronskian([t**k for k in s], t)
    poly = sympy.Poly(sympy.expand(W), t)
    return min(m[0] for m in poly.monoms())


def test_interior_point_coefficient_vanishes():
    assert coefficient(2, 0, 0, 2, [(0, 1, 3), (-3, -1, 0)]) == 0


def test_coefficient_example():
    assert coefficient(1, 2, 1, 1, [(0, 1)]) == 4


@pytest.mark.parametrize("name, g, data", full_slope_fixtures())
def test_degree_identity_on_fixtures(name, g, data):
    W = reduce_weierstrass(data)
    assert W.degree == g * (data.r + 1) ** 2


def test_circle_fixture_coefficients():
    _, _, data = full_slope_fixtures()[0]
    assert reduce_weierstrass(data) == Divisor({Point.vertex("x"): 2, Point.vertex("y"): 2})


def test_midpoint_agrees_with_full_on_symmetric_progressions():
    _, _, data = full_slope_fixtures()[0]
    surrogate = SlopeData(
        data.n,
        data.r,
        {v: VertexSlopes(v, vs.d_x, vs.g_x, {k: s[:1] for k, s in vs.directions.items()}) for v, vs in data.vertices.items()},
    )
    assert surrogate.mode == "surrogate"
    assert midpoint_weierstrass(surrogate) == reduce_weierstrass(data)


def test_midpoint_symmetric_zero():
    data = SlopeData(
        1,
        3,
        {
            "m": VertexSlopes("m", 0, 0, {ArcKey("m", "a", "e1"): (0,), ArcKey("m", "b", "e2"): (0,)}),
            "a": VertexSlopes("a", 0, 0, {ArcKey("a", "m", "e1"): (0,)}, val=2),
            "b": VertexSlopes("b", 0, 0, {ArcKey("b", "m", "e2"): (0,)}, val=2),
        },
    )
    assert midpoint_weierstrass(data).coefficient(Point.vertex("m")) == 0


def test_midpoint_r0_is_reduced_coefficient():
    data = SlopeData(
        1,
        0,
        {
            "x": VertexSlopes("x", 3, 0, {ArcKey("x", "y", "e"): (-2,)}),
            "y": VertexSlopes("y", 0, 0, {ArcKey("y", "x", "e"): (2,)}),
        },
    )
    W = midpoint_weierstrass(data)
    assert W.coefficient(Point.vertex("x")) == 3 - (-2)
    assert W.coefficient(Point.vertex("y")) == 0 - 2


def test_midpoint_missing_partner():
    data = SlopeData(1, 1, {"x": VertexSlopes("x", 1, 0, {ArcKey("x", "y", "e"): (0,)})})
    with pytest.raises(SlopeDataError):
        midpoint_weierstrass(data)


@pytest.mark.parametrize("n", [1, 5, 10, 23])
def test_surrogate_degree_on_circle(n):
    G = circle()
    data = surrogate_slopes(G, Divisor({Point.vertex("x"): 1}), n)
    W = midpoint_weierstrass(data)
    r = data.r
    assert abs(W.degree - (r + 1) ** 2) <= 2 * (r + 1)
    # for r = nd - g the identity is exact
    assert W.degree == (r + 1) ** 2


def test_full_mode_rejects_wrong_length():
    _, _, data = full_slope_fixtures()[0]
    data.vertices["x"].directions[ArcKey("x", "y", "e1")] = (0, 1, 2)
    with pytest.raises(SlopeDataError):
        reduce_weierstrass(data)


def test_slope_data_json_roundtrip():
    for _, _, data in full_slope_fixtures():
        again = SlopeData.from_json(data.to_json())
        assert reduce_weierstrass(again) == reduce_weierstrass(data)
    surrogate = surrogate_slopes(circle(), Divisor({Point.vertex("x"): 1}), 4)
    again = SlopeData.from_json(surrogate.to_json())
    assert midpoint_weierstrass(again) == midpoint_weierstrass(surrogate)


@pytest.mark.parametrize("s, r, w", [((0, 1, 2, 3), 3, 0), ((0, 2), 1, 1), ((1, 2, 3), 2, 3), ((-1, 1), 1, -1)])
def test_local_weight(s, r, w):
    assert local_weight(s, r) == w


def test_local_weight_rejects_non_strict():
    with pytest.raises(SlopeDataError):
        local_weight((0, 0, 1))


def test_wronskian_examples():
    assert wronskian_order((0, 1, 2)) == 0
    assert wronskian((0, 1, 2)).c == [2]
    assert wronskian_order((0, 2)) == 1
    assert wronskian((0, 2)).c == [0, 2]
    with pytest.raises(SlopeDataError):
        wronskian_order((-1, 2))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 4).flatmap(lambda r: st.lists(st.integers(0, 12), min_size=r + 1, max_size=r + 1, unique=True)))
def test_wronskian_order_matches_sympy(s):
    s = sorted(s)
    assert wronskian_order(s) == sympy_wronskian_order(s) == local_weight(s)


def test_total_weight_checks():
    assert total_weight_checks(1, 3, [0, 0, 0])
    assert total_weight_checks(2, 1, [1, 1])
    assert not total_weight_checks(2, 1, [1])


def test_total_weight_rational_curve():
    # H = span(1/t, t) on the projective line: orders (-1, 1) at 0 and at
    # infinity, (0, 1) elsewhere since the Wronskian 2/t has no other zeros
    t = sympy.symbols("t")
    W = sympy.simplify(sympy.wronskian([1 / t, t], t))
    assert W == 2 / t
    weights = [local_weight((-1, 1)), local_weight((-1, 1))]
    assert weights == [-1, -1]
    assert total_weight_checks(0, 1, weights)
