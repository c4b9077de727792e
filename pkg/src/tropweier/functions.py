"""Piecewise affine functions and atom-plus-density measures on metric graphs."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .graph import Divisor, GraphError, MetricGraph, Point, TangentDirection
from .rational import RationalLike, as_fraction

Break = Tuple[Fraction, Fraction]  # (offset, value)


class PLFunction:
    """A continuous function, affine between finitely many breakpoints.

    Each edge carries its breakpoint list ``[(0, f(u)), ..., (len, f(v))]``;
    vertex values are shared by all incident edge traces.
    """

    def __init__(
        self,
        graph: MetricGraph,
        vertex_values: Mapping[str, RationalLike],
        edge_breaks: Optional[Mapping[str, Iterable[Tuple[RationalLike, RationalLike]]]] = None,
    ):
        self.graph = graph
        vals = {v: as_fraction(vertex_values[v]) for v in graph.vertices}
        self._vertex = vals
        self._edges: Dict[str, Tuple[Break, ...]] = {}
        edge_breaks = edge_breaks or {}
        for e in graph.edges:
            inner = sorted((as_fraction(t), as_fraction(y)) for t, y in edge_breaks.get(e.id, ()))
            pts: List[Break] = [(Fraction(0), vals[e.u])]
            for t, y in inner:
                if t <= 0 or t >= e.length:
                    if t == 0 and y == vals[e.u] or t == e.length and y == vals[e.v]:
                        continue
                    raise GraphError(f"breakpoint {t} on edge {e.id} is not interior or breaks continuity")
                if t == pts[-1][0]:
                    raise GraphError(f"duplicate breakpoint {t} on edge {e.id}")
                pts.append((t, y))
            pts.append((e.length, vals[e.v]))
            self._edges[e.id] = _drop_collinear(pts)

    # -- construction ------------------------------------------------------
    @classmethod
    def constant(cls, graph: MetricGraph, c: RationalLike = 0) -> "PLFunction":
        return cls(graph, {v: c for v in graph.vertices})

    @classmethod
    def from_point_values(cls, graph: MetricGraph, values: Mapping[Point, RationalLike]) -> "PLFunction":
        """Interpolate affinely between the given points; every vertex must be
        present."""
        vv = {}
        breaks: Dict[str, List[Tuple[Fraction, Fraction]]] = {}
        for p, y in values.items():
            p = graph.canonical(p)
            if p.is_vertex:
                vv[p.name] = y
            else:
                breaks.setdefault(p.name, []).append((p.offset, as_fraction(y)))
        missing = [v for v in graph.vertices if v not in vv]
        if missing:
            raise GraphError(f"values missing at vertices {missing}")
        return cls(graph, vv, breaks)

    # -- evaluation -------------------------------------------------------
    def edge_breaks(self, eid: str) -> Tuple[Break, ...]:
        return self._edges[eid]

    def value(self, p: Point) -> Fraction:
        p = self.graph.canonical(p)
        if p.is_vertex:
            return self._vertex[p.name]
        pts = self._edges[p.name]
        ts = [t for t, _ in pts]
        i = bisect_right(ts, p.offset)
        (t0, y0), (t1, y1) = pts[i - 1], pts[i]
        if p.offset == t0:
            return y0
        return y0 + (y1 - y0) * (p.offset - t0) / (t1 - t0)

    __call__ = value

    def slope(self, d: TangentDirection) -> Fraction:
        """Outgoing slope at ``d.base`` along ``d``."""
        e = self.graph.edge(d.edge)
        pts = self._edges[e.id]
        ts = [t for t, _ in pts]
        if d.base.is_vertex:
            t = Fraction(0) if d.sign > 0 else e.length
        else:
            t = d.base.offset
        if d.sign > 0:
            i = bisect_right(ts, t)
            (t0, y0), (t1, y1) = pts[i - 1], pts[i]
            return (y1 - y0) / (t1 - t0)
        i = bisect_left(ts, t)
        (t0, y0), (t1, y1) = pts[i - 1], pts[i]
        return (y0 - y1) / (t1 - t0)

    def slopes_at(self, p: Point) -> List[Fraction]:
        return [self.slope(d) for d in self.graph.tangent_directions(p)]

    def breakpoints(self) -> List[Point]:
        """All vertices plus interior breakpoints, in canonical order."""
        out = [Point.vertex(v) for v in self.graph.vertices]
        for eid, pts in self._edges.items():
            out.extend(Point.interior(eid, t) for t, _ in pts[1:-1])
        return sorted(out)

    def has_integer_slopes(self) -> bool:
        for pts in self._edges.values():
            for (t0, y0), (t1, y1) in zip(pts, pts[1:]):
                if ((y1 - y0) / (t1 - t0)).denominator != 1:
                    return False
        return True

    def max_value(self) -> Fraction:
        return max(y for pts in self._edges.values() for _, y in pts) if self._edges else max(self._vertex.values())

    def min_value(self) -> Fraction:
        return min(y for pts in self._edges.values() for _, y in pts) if self._edges else min(self._vertex.values())

    # -- arithmetic -------------------------------------------------------
    def _combine(self, other: "PLFunction", op) -> "PLFunction":
        if other.graph != self.graph:
            raise GraphError("functions live on different graphs")
        vv = {v: op(self._vertex[v], other._vertex[v]) for v in self.graph.vertices}
        breaks = {}
        for eid in self._edges:
            ts = sorted({t for t, _ in self._edges[eid][1:-1]} | {t for t, _ in other._edges[eid][1:-1]})
            breaks[eid] = [
                (t, op(self.value(Point.interior(eid, t)), other.value(Point.interior(eid, t)))) for t in ts
            ]
        return PLFunction(self.graph, vv, breaks)

    def __add__(self, other):
        if isinstance(other, PLFunction):
            return self._combine(other, lambda a, b: a + b)
        c = as_fraction(other)
        return self._map(lambda y: y + c)

    def __sub__(self, other):
        if isinstance(other, PLFunction):
            return self._combine(other, lambda a, b: a - b)
        c = as_fraction(other)
        return self._map(lambda y: y - c)

    def __neg__(self):
        return self._map(lambda y: -y)

    def __mul__(self, k):
        k = as_fraction(k)
        return self._map(lambda y: k * y)

    __rmul__ = __mul__

    def _map(self, fn) -> "PLFunction":
        vv = {v: fn(y) for v, y in self._vertex.items()}
        breaks = {eid: [(t, fn(y)) for t, y in pts[1:-1]] for eid, pts in self._edges.items()}
        return PLFunction(self.graph, vv, breaks)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PLFunction)
            and other.graph == self.graph
            and other._vertex == self._vertex
            and other._edges == self._edges
        )

    def __repr__(self) -> str:
        nb = sum(len(p) - 2 for p in self._edges.values())
        return f"PLFunction(vertices={len(self._vertex)}, interior_breaks={nb})"

    def to_json(self) -> dict:
        from .rational import fmt

        return {
            "vertices": {v: fmt(y) for v, y in self._vertex.items()},
            "edges": {eid: [[fmt(t), fmt(y)] for t, y in pts] for eid, pts in self._edges.items()},
        }


def _drop_collinear(pts: List[Break]) -> Tuple[Break, ...]:
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        (t0, y0), (t1, y1), (t2, y2) = out[-1], pts[i], pts[i + 1]
        if (y1 - y0) * (t2 - t1) != (y2 - y1) * (t1 - t0):
            out.append(pts[i])
    out.append(pts[-1])
    return tuple(out)


def lower_envelope(functions: Sequence[PLFunction]) -> PLFunction:
    """Pointwise minimum of PL functions on a common graph (exact; new
    breakpoints appear where pieces cross)."""
    if not functions:
        raise ValueError("need at least one function")
    graph = functions[0].graph
    vv = {v: min(f.value(Point.vertex(v)) for f in functions) for v in graph.vertices}
    breaks = {}
    for e in graph.edges:
        ts = sorted({t for f in functions for t, _ in f.edge_breaks(e.id)})
        out = []
        for t0, t1 in zip(ts, ts[1:]):
            lines = []
            for f in functions:
                a = f.value(graph.point(e.id, t0))
                b = f.value(graph.point(e.id, t1))
                lines.append((a, (b - a) / (t1 - t0)))
            cuts = {t0}
            for i in range(len(lines)):
                for j in range(i + 1, len(lines)):
                    (a1, s1), (a2, s2) = lines[i], lines[j]
                    if s1 != s2:
                        x = (a2 - a1) / (s1 - s2)
                        if 0 < x < t1 - t0:
                            cuts.add(t0 + x)
            for t in sorted(cuts):
                out.append((t, min(a + s * (t - t0) for a, s in lines)))
        breaks[e.id] = [(t, y) for t, y in out if 0 < t < e.length]
    return PLFunction(graph, vv, breaks)


# ---------------------------------------------------------------------------


class Measure:
    """Finite signed measure: rational atoms plus piecewise-constant densities
    (per unit length) on edge subintervals."""

    def __init__(
        self,
        graph: MetricGraph,
        atoms: Optional[Mapping[Point, RationalLike]] = None,
        densities: Optional[Iterable[Tuple[str, RationalLike, RationalLike, RationalLike]]] = None,
    ):
        self.graph = graph
        acc: Dict[Point, Fraction] = {}
        for p, m in (atoms or {}).items():
            p = graph.canonical(p)
            acc[p] = acc.get(p, Fraction(0)) + as_fraction(m)
        self.atoms: Dict[Point, Fraction] = {p: m for p, m in sorted(acc.items()) if m != 0}
        raw: Dict[str, List[Tuple[Fraction, Fraction, Fraction]]] = {}
        for eid, a, b, rho in densities or ():
            e = graph.edge(eid)
            a, b, rho = as_fraction(a), as_fraction(b), as_fraction(rho)
            if not (0 <= a < b <= e.length):
                raise GraphError(f"density interval [{a}, {b}] invalid on edge {eid}")
            raw.setdefault(eid, []).append((a, b, rho))
        self.densities: Dict[str, Tuple[Tuple[Fraction, Fraction, Fraction], ...]] = {
            eid: _normalize_intervals(raw[eid]) for eid in sorted(raw)
        }
        self.densities = {eid: iv for eid, iv in self.densities.items() if iv}

    @classmethod
    def dirac(cls, graph: MetricGraph, p: Point, mass: RationalLike = 1) -> "Measure":
        return cls(graph, {p: mass})

    @classmethod
    def from_divisor(cls, graph: MetricGraph, D: Divisor) -> "Measure":
        return cls(graph, {p: c for p, c in D.items()})

    @property
    def mass(self) -> Fraction:
        total = sum(self.atoms.values(), Fraction(0))
        for iv in self.densities.values():
            total += sum(((b - a) * rho for a, b, rho in iv), Fraction(0))
        return total

    def is_nonnegative(self) -> bool:
        return all(m >= 0 for m in self.atoms.values()) and all(
            rho >= 0 for iv in self.densities.values() for _, _, rho in iv
        )

    def density_on(self, eid: str) -> Tuple[Tuple[Fraction, Fraction, Fraction], ...]:
        return self.densities.get(eid, ())

    def edge_mass(self, eid: str, lo: Fraction, hi: Fraction, closed_left: bool = True) -> Fraction:
        """Mass of the segment ``[lo, hi)`` of edge ``eid`` (``(lo, hi)`` if
        ``closed_left`` is false); vertex atoms only count through the
        canonical points inside the segment."""
        m = Fraction(0)
        for a, b, rho in self.density_on(eid):
            lo2, hi2 = max(a, lo), min(b, hi)
            if hi2 > lo2:
                m += (hi2 - lo2) * rho
        for p, w in self.atoms.items():
            if p.is_vertex or p.name != eid:
                continue
            if (lo <= p.offset if closed_left else lo < p.offset) and p.offset < hi:
                m += w
        return m

    def _binop(self, other: "Measure", sign: int) -> "Measure":
        if other.graph != self.graph:
            raise GraphError("measures live on different graphs")
        atoms = dict(self.atoms)
        for p, m in other.atoms.items():
            atoms[p] = atoms.get(p, Fraction(0)) + sign * m
        dens = [(eid, a, b, r) for eid, iv in self.densities.items() for a, b, r in iv]
        dens += [(eid, a, b, sign * r) for eid, iv in other.densities.items() for a, b, r in iv]
        return Measure(self.graph, atoms, dens)

    def __add__(self, other: "Measure") -> "Measure":
        return self._binop(other, 1)

    def __sub__(self, other: "Measure") -> "Measure":
        return self._binop(other, -1)

    def __mul__(self, k) -> "Measure":
        k = as_fraction(k)
        return Measure(
            self.graph,
            {p: k * m for p, m in self.atoms.items()},
            [(eid, a, b, k * r) for eid, iv in self.densities.items() for a, b, r in iv],
        )

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Measure)
            and self.graph == other.graph
            and self.atoms == other.atoms
            and self.densities == other.densities
        )

    def __repr__(self) -> str:
        return f"Measure(atoms={len(self.atoms)}, density_edges={len(self.densities)}, mass={self.mass})"

    def pushforward(self, refinement) -> "Measure":
        """The same measure expressed on a refined model."""
        new = refinement.graph
        atoms = {refinement.to_new(p): m for p, m in self.atoms.items()}
        dens = []
        for eid, iv in self.densities.items():
            for start, nid in refinement.pieces[eid]:
                ln = new.length(nid)
                for a, b, rho in iv:
                    lo, hi = max(a, start), min(b, start + ln)
                    if hi > lo:
                        dens.append((nid, lo - start, hi - start, rho))
        return Measure(new, atoms, dens)

    def pullback(self, refinement) -> "Measure":
        """Express a measure living on ``refinement.graph`` on the original
        model."""
        atoms: Dict[Point, Fraction] = {}
        for p, m in self.atoms.items():
            q = refinement.to_old(p)
            atoms[q] = atoms.get(q, Fraction(0)) + m
        dens = []
        for nid, iv in self.densities.items():
            eid, start = refinement.origin[nid]
            for a, b, rho in iv:
                dens.append((eid, a + start, b + start, rho))
        return Measure(refinement.original, atoms, dens)

    def to_json(self) -> dict:
        from .rational import fmt

        return {
            "atoms": [{"point": p.to_json(), "mass": fmt(m)} for p, m in self.atoms.items()],
            "densities": [
                {"edge": eid, "from": fmt(a), "to": fmt(b), "density": fmt(r)}
                for eid, iv in self.densities.items()
                for a, b, r in iv
            ],
        }


def _normalize_intervals(ivs):
    """Split overlapping intervals into disjoint pieces with summed densities
    and merge equal neighbours."""
    cuts = sorted({a for a, _, _ in ivs} | {b for _, b, _ in ivs})
    out = []
    for lo, hi in zip(cuts, cuts[1:]):
        rho = sum((r for a, b, r in ivs if a <= lo and hi <= b), Fraction(0))
        if rho == 0:
            continue
        if out and out[-1][1] == lo and out[-1][2] == rho:
            out[-1] = (out[-1][0], hi, rho)
        else:
            out.append((lo, hi, rho))
    return tuple(out)


def laplacian(f: PLFunction) -> Measure:
    """``Delta f = -f'' dtheta - sum_p sigma_p delta_p``.  For PL functions
    only the atomic part survives: the atom at ``p`` is minus the sum of the
    outgoing slopes."""
    atoms = {}
    for p in f.breakpoints():
        s = sum(f.slopes_at(p), Fraction(0))
        if s:
            atoms[p] = -s
    return Measure(f.graph, atoms)
