"""Small named graphs, divisors and slope data used by tests and examples."""

from __future__ import annotations

from fractions import Fraction

from .graph import Divisor, MetricGraph, Point
from .slopes import SlopeStructure, rank_from_jumps
from .weierstrass import ArcKey, SlopeData, VertexSlopes


def circle(lengths=(1, 2)) -> MetricGraph:
    """Two vertices ``x``, ``y`` joined by parallel edges ``e1``, ``e2``."""
    a, b = lengths
    return MetricGraph({"x": 0, "y": 0}, [("e1", "x", "y", a), ("e2", "x", "y", b)])


def triangle(lengths=(1, 1, 1)) -> MetricGraph:
    a, b, c = lengths
    return MetricGraph({"u": 0, "v": 0, "w": 0}, [("e1", "u", "v", a), ("e2", "v", "w", b), ("e3", "w", "u", c)])


def theta(paths=((1, 1), (1, 2), (2, 1))) -> MetricGraph:
    """``a`` and ``b`` joined by three paths, each subdivided once at
    ``m1``, ``m2``, ``m3``."""
    edges = []
    verts = {"a": 0, "b": 0}
    for k, (p, q) in enumerate(paths, start=1):
        m = f"m{k}"
        verts[m] = 0
        edges.append((f"p{k}a", "a", m, p))
        edges.append((f"p{k}b", m, "b", q))
    return MetricGraph(verts, edges)


def dumbbell(loop=1, bridge=1) -> MetricGraph:
    """Triangles at ``a`` and ``c`` joined by the bridge ``a -- c``."""
    return MetricGraph(
        {v: 0 for v in ("a", "a1", "a2", "c", "c1", "c2")},
        [
            ("l1", "a", "a1", loop),
            ("l2", "a1", "a2", loop),
            ("l3", "a2", "a", loop),
            ("br", "a", "c", bridge),
            ("r1", "c", "c1", loop),
            ("r2", "c1", "c2", loop),
            ("r3", "c2", "c", loop),
        ],
    )


def genus_one_vertex() -> MetricGraph:
    return MetricGraph({"x": 1}, [])


def path(length=1) -> MetricGraph:
    return MetricGraph({"x": 0, "y": 0}, [("e", "x", "y", length)])


# ---------------------------------------------------------------------------
# an r = 1, d = 2 slope structure on a circle of length 2


def fold_rank():
    """Rank function on ``Box^2_1`` with jumps ``(0,0)`` and ``(1,1)``."""
    return rank_from_jumps(2, 1, [(0, 0), (1, 1)])


def circle_g12():
    """``(D, S, grid)``: ``D = 2(x)`` on the circle with two unit edges,
    slopes ``{0, 1}`` leaving ``x`` and ``{-1, 0}`` leaving ``y``."""
    G = circle((1, 1))
    fold = fold_rank()
    S = SlopeStructure(
        G,
        1,
        {("e1", 1): [0, 1], ("e2", 1): [0, 1], ("e1", -1): [-1, 0], ("e2", -1): [-1, 0]},
        {"x": fold, "y": fold},
    )
    D = Divisor({Point.vertex("x"): 2})
    grid = [G.point("e1", Fraction(1, 2)), G.point("e2", Fraction(1, 2))]
    return G, D, S, grid


def circle_g12_bad():
    """The same data with the slopes on ``e1`` widened to ``{0, 2}``."""
    G, D, S, grid = circle_g12()
    arcs = dict(S.arcs)
    arcs[("e1", 1)] = (0, 2)
    arcs[("e1", -1)] = (-2, 0)
    return G, D, SlopeStructure(G, 1, arcs, S.vertex_ranks), grid


def circle_g12_certificate(c):
    """``min(dist(x, .), c)`` for ``0 <= c <= 1``: pushes the two chips at
    ``x`` to the points at distance ``c``."""
    from .functions import PLFunction

    G, _, _, _ = circle_g12()
    c = Fraction(c)
    breaks = {eid: [(c, c)] if 0 < c < 1 else [] for eid in ("e1", "e2")}
    return PLFunction(G, {"x": 0, "y": c}, breaks)


# ---------------------------------------------------------------------------
# full slope data


def _vs(vid, d_x, g_x, dirs, val=None):
    return VertexSlopes(vid, d_x, g_x, {ArcKey(t, h, e): tuple(s) for (t, h, e), s in dirs.items()}, val)


def full_slope_fixtures():
    """``(name, genus, SlopeData)`` triples of complete series with ``d = r + g``."""
    out = []
    out.append(
        (
            "circle_g12",
            1,
            SlopeData(
                1,
                1,
                {
                    "x": _vs("x", 2, 0, {("x", "y", "e1"): (0, 1), ("x", "y", "e2"): (0, 1)}),
                    "y": _vs("y", 0, 0, {("y", "x", "e1"): (-1, 0), ("y", "x", "e2"): (-1, 0)}),
                },
            ),
        )
    )
    out.append(
        (
            "circle_12_degree_one",
            1,
            SlopeData(
                1,
                0,
                {
                    "x": _vs("x", 1, 0, {("x", "y", "e1"): (0,), ("x", "y", "e2"): (0,)}),
                    "y": _vs("y", 0, 0, {("y", "x", "e1"): (0,), ("y", "x", "e2"): (0,)}),
                },
            ),
        )
    )
    out.append(("elliptic_vertex", 1, SlopeData(1, 1, {"x": _vs("x", 2, 1, {}, val=0)})))
    return out
