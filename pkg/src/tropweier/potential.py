"""Resistance, Green functions, the canonical admissible measure and an exact
Poisson solver for atom-plus-density measures."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .functions import Measure, PLFunction
from .graph import Divisor, GraphError, MetricGraph, Point, genus, refine
from .linalg import bareiss_solve

INFINITY = math.inf
Resistance = Union[Fraction, float]  # Fraction, or math.inf between components


class ResistanceTable:
    """Pairwise effective resistances among a fixed set of points.

    The graph is refined once so every point is a vertex; each component is
    grounded at its first vertex and one linear solve per point gives the
    needed columns of the grounded inverse.
    """

    def __init__(self, graph: MetricGraph, points: Iterable[Point]):
        pts = sorted({graph.canonical(p) for p in points})
        self.graph = graph
        ref = refine(graph, pts)
        g = ref.graph
        self._new = {p: ref.to_new(p).name for p in pts}
        comp_of, ground = {}, {}
        for comp in g.components():
            for w in comp:
                comp_of[w] = comp[0]
            ground[comp[0]] = comp[0]
        self._comp = comp_of
        free = [w for w in g.vertices if w not in ground]
        index = {w: i for i, w in enumerate(free)}
        n = len(free)
        L = [[Fraction(0)] * n for _ in range(n)]
        for e in g.edges:
            c = 1 / e.length
            iu, iv = index.get(e.u), index.get(e.v)
            if iu is not None:
                L[iu][iu] += c
            if iv is not None:
                L[iv][iv] += c
            if iu is not None and iv is not None:
                L[iu][iv] -= c
                L[iv][iu] -= c
        targets = sorted({self._new[p] for p in pts if self._new[p] in index})
        cols = []
        for w in targets:
            b = [Fraction(0)] * n
            b[index[w]] = Fraction(1)
            cols.append(b)
        sols = bareiss_solve(L, *cols) if cols else []
        # X[w][w'] = grounded inverse entry; zero when either is grounded
        self._X: Dict[str, Dict[str, Fraction]] = {}
        for w, sol in zip(targets, sols):
            self._X[w] = {t: sol[index[t]] for t in targets}

    def _x(self, a: str, b: str) -> Fraction:
        row = self._X.get(a)
        if row is None:
            return Fraction(0)
        return row.get(b, Fraction(0))

    def __call__(self, p: Point, q: Point) -> Resistance:
        a = self._new[self.graph.canonical(p)]
        b = self._new[self.graph.canonical(q)]
        if a == b:
            return Fraction(0)
        if self._comp[a] != self._comp[b]:
            return INFINITY
        return self._x(a, a) + self._x(b, b) - 2 * self._x(a, b)


def resistance(graph: MetricGraph, a: Point, b: Point) -> Resistance:
    """Effective resistance between ``a`` and ``b`` (unit resistance per unit
    length); ``math.inf`` when they lie in different components."""
    return ResistanceTable(graph, [a, b])(a, b)


@lru_cache(maxsize=256)
def edge_resistance(graph: MetricGraph, eid: str) -> Resistance:
    """Resistance between the endpoints of ``eid`` in the graph with the open
    edge removed; ``math.inf`` for bridges."""
    e = graph.edge(eid)
    return resistance(graph.without_edge(eid), Point.vertex(e.u), Point.vertex(e.v))


def _require_connected(graph: MetricGraph):
    if not graph.is_connected():
        raise GraphError("Green functions need a connected graph")


def green(graph: MetricGraph, z: Point, x: Point, y: Point) -> Fraction:
    """``g_z(x, y)``: the solution of ``Delta_y g = delta_x - delta_z`` with
    ``g_z(x, z) = 0``."""
    _require_connected(graph)
    r = ResistanceTable(graph, [x, y, z])
    return (r(z, x) + r(z, y) - r(x, y)) / 2


def green_function(graph: MetricGraph, z: Point, x: Point) -> PLFunction:
    """``y -> g_z(x, y)`` as a PL function on ``graph`` (breakpoints at the
    points ``x`` and ``z``)."""
    _require_connected(graph)
    x, z = graph.canonical(x), graph.canonical(z)
    ref = refine(graph, [x, z])
    nodes = [ref.to_old(Point.vertex(w)) for w in ref.graph.vertices]
    r = ResistanceTable(graph, nodes + [x, z])
    rzx = r(z, x)
    values = {p: (rzx + r(z, p) - r(x, p)) / 2 for p in nodes}
    return PLFunction.from_point_values(graph, values)


# ---------------------------------------------------------------------------
# integration against atom + density measures


def quadrature_nodes(mu: Measure, breaks: Iterable[Point] = ()) -> Dict[Point, Fraction]:
    """Weights ``w`` with ``integral F dmu = sum w[p] F(p)`` for every ``F``
    that is a cubic polynomial on each edge segment between density
    boundaries and the given break points (Simpson's rule, exact for cubics)."""
    graph = mu.graph
    by_edge: Dict[str, set] = {}
    for p in breaks:
        p = graph.canonical(p)
        if not p.is_vertex:
            by_edge.setdefault(p.name, set()).add(p.offset)
    w: Dict[Point, Fraction] = dict(mu.atoms)

    def add(p, m):
        w[p] = w.get(p, Fraction(0)) + m

    for eid, ivs in mu.densities.items():
        inner = by_edge.get(eid, set())
        for a, b, rho in ivs:
            cuts = sorted({a, b} | {t for t in inner if a < t < b})
            for s, t in zip(cuts, cuts[1:]):
                h = (t - s) * rho / 6
                add(graph.point(eid, s), h)
                add(graph.point(eid, (s + t) / 2), 4 * h)
                add(graph.point(eid, t), h)
    return {p: m for p, m in w.items() if m != 0}


def _check_probability(mu: Measure):
    if mu.mass != 1:
        raise ValueError(f"measure must have mass 1, got {mu.mass}")


def green_mu(graph: MetricGraph, mu: Measure, x: Point, y: Point) -> Fraction:
    """``g_mu(x, y) = integral g_z(x, y) dmu(z)`` (base-point normalization
    inherited from ``g_z(x, z) = 0``)."""
    _require_connected(graph)
    _check_probability(mu)
    nodes = quadrature_nodes(mu, [x, y])
    r = ResistanceTable(graph, list(nodes) + [x, y])
    rxy = r(x, y)
    return sum((m * (r(z, x) + r(z, y) - rxy) for z, m in nodes.items()), Fraction(0)) / 2


def energy_constant(graph: MetricGraph, mu: Measure) -> Fraction:
    """``c_mu = 1/2 iint r(y, z) dmu dmu``.

    ``g_mu - c_mu`` is the uniformized Green function, the one with
    ``integral g(x, y) dmu(y) = 0`` for every ``x``."""
    _require_connected(graph)
    _check_probability(mu)
    outer = quadrature_nodes(mu, list(mu.atoms))
    inner = {y: quadrature_nodes(mu, list(mu.atoms) + [y]) for y in outer}
    pts = set(outer)
    for nodes in inner.values():
        pts.update(nodes)
    r = ResistanceTable(graph, pts)
    total = Fraction(0)
    for y, wy in outer.items():
        total += wy * sum((wz * r(y, z) for z, wz in inner[y].items()), Fraction(0))
    return total / 2


def green_mu_uniform(graph: MetricGraph, mu: Measure, x: Point, y: Point) -> Fraction:
    return green_mu(graph, mu, x, y) - energy_constant(graph, mu)


# ---------------------------------------------------------------------------


def zhang_measure(graph: MetricGraph) -> Measure:
    """The canonical admissible measure: atoms ``g_x / g`` and density
    ``1 / (g (len_e + rho_e))`` along each edge."""
    _, g = genus(graph)
    if g == 0:
        raise ValueError("the canonical admissible measure needs genus > 0")
    atoms = {Point.vertex(v): Fraction(gx, g) for v, gx in graph.vertex_genera.items() if gx}
    dens = []
    for e in graph.edges:
        rho = edge_resistance(graph, e.id)
        if rho == INFINITY:
            continue
        dens.append((e.id, 0, e.length, 1 / (g * (e.length + rho))))
    return Measure(graph, atoms, dens)


def foster_sum(graph: MetricGraph) -> Fraction:
    """``sum_e len_e / (len_e + rho_e)``; equals the first Betti number."""
    total = Fraction(0)
    for e in graph.edges:
        rho = edge_resistance(graph, e.id)
        if rho != INFINITY:
            total += e.length / (e.length + rho)
    return total


def green_mu_divisor(graph: MetricGraph, mu: Measure, D: Divisor, x: Point, uniform: bool = False) -> Fraction:
    """``g_mu(D, x) = sum_p D(p) g_mu(p, x)``."""
    val = sum((c * green_mu(graph, mu, p, x) for p, c in D.items()), Fraction(0))
    if uniform:
        val -= D.degree * energy_constant(graph, mu)
    return val


def verify_admissibility(
    graph: MetricGraph,
    D: Divisor,
    mu: Measure,
    samples: Sequence[Point],
    uniform: bool = False,
) -> Tuple[Optional[Fraction], bool, List[Fraction]]:
    """Evaluate ``g_mu(D, x) + g_mu(x, x)`` at each sample.

    Returns ``(c, ok, values)`` where ``ok`` says the values agree and ``c`` is
    minus the common value (``None`` if they differ).  ``uniform`` selects the
    uniformized normalization of ``g_mu``; the two differ by
    ``(deg D + 1) c_mu``.
    """
    if D.degree == -2:
        raise ValueError("deg D = -2 is excluded")
    _require_connected(graph)
    _check_probability(mu)
    samples = [graph.canonical(p) for p in samples]
    support = list(D.support)
    nodes = quadrature_nodes(mu, support + samples)
    r = ResistanceTable(graph, list(nodes) + support + samples)
    shift = energy_constant(graph, mu) if uniform else Fraction(0)

    def gmu(a, b):
        rab = r(a, b)
        return sum((m * (r(z, a) + r(z, b) - rab) for z, m in nodes.items()), Fraction(0)) / 2 - shift

    values = []
    for x in samples:
        values.append(sum((c * gmu(p, x) for p, c in D.items()), Fraction(0)) + gmu(x, x))
    ok = len(set(values)) <= 1
    return (-values[0] if ok and values else None), ok, values


# ---------------------------------------------------------------------------
# Poisson equation


class Potential:
    """Piecewise-quadratic solution of ``Delta phi = nu`` on a refined model."""

    def __init__(self, refinement, vertex_values: Dict[str, Fraction], rho: Dict[str, Fraction]):
        self.refinement = refinement
        self.values = vertex_values
        self.rho = rho

    def value(self, p: Point) -> Fraction:
        q = self.refinement.to_new(p)
        if q.is_vertex:
            return self.values[q.name]
        e = self.refinement.graph.edge(q.name)
        return self._on_edge(e, q.offset)

    def _on_edge(self, e, t: Fraction) -> Fraction:
        a, b, ln, rho = self.values[e.u], self.values[e.v], e.length, self.rho.get(e.id, Fraction(0))
        return a + (b - a) * t / ln + rho * t * (ln - t) / 2

    def extrema(self) -> Tuple[Fraction, Fraction]:
        vals = list(self.values.values())
        for e in self.refinement.graph.edges:
            rho = self.rho.get(e.id, Fraction(0))
            if rho:
                ln = e.length
                t = ln / 2 + (self.values[e.v] - self.values[e.u]) / (rho * ln)
                if 0 < t < ln:
                    vals.append(self._on_edge(e, t))
        return min(vals), max(vals)

    def oscillation(self) -> Fraction:
        lo, hi = self.extrema()
        return hi - lo

    def to_pl(self) -> PLFunction:
        """The solution as a PL function on the original graph (only valid
        for purely atomic right-hand sides)."""
        if any(self.rho.values()):
            raise ValueError("solution is not piecewise affine")
        ref = self.refinement
        vals = {ref.to_old(Point.vertex(w)): y for w, y in self.values.items()}
        return PLFunction.from_point_values(ref.original, vals)


def solve_poisson(graph: MetricGraph, nu: Measure, ground: Optional[Point] = None) -> Potential:
    """Solve ``Delta phi = nu`` for a mass-zero measure on a connected graph,
    normalized by ``phi(ground) = 0`` (default: first vertex)."""
    if nu.mass != 0:
        raise ValueError(f"right-hand side must have mass 0, got {nu.mass}")
    _require_connected(graph)
    cuts = list(nu.atoms)
    for eid, ivs in nu.densities.items():
        for a, b, _ in ivs:
            cuts += [graph.point(eid, a), graph.point(eid, b)]
    if ground is not None:
        cuts.append(ground)
    ref = refine(graph, cuts)
    fine = nu.pushforward(ref)
    g = ref.graph
    rho = {}
    for eid, ivs in fine.densities.items():
        # after refinement each density interval covers whole sub-edges
        (a, b, r), = ivs
        rho[eid] = r
    root = ref.to_new(ground).name if ground is not None else g.vertices[0]
    free = [w for w in g.vertices if w != root]
    index = {w: i for i, w in enumerate(free)}
    n = len(free)
    L = [[Fraction(0)] * n for _ in range(n)]
    rhs = [Fraction(0)] * n
    for p, m in fine.atoms.items():
        if p.name in index:
            rhs[index[p.name]] += m
    for e in g.edges:
        c = 1 / e.length
        half = rho.get(e.id, Fraction(0)) * e.length / 2
        for w, o in ((e.u, e.v), (e.v, e.u)):
            i = index.get(w)
            if i is None:
                continue
            L[i][i] += c
            j = index.get(o)
            if j is not None:
                L[i][j] -= c
            rhs[i] += half
    sol = bareiss_solve(L, rhs)[0] if n else []
    values = {root: Fraction(0)}
    values.update({w: sol[index[w]] for w in free})
    return Potential(ref, values, rho)

