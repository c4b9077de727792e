"""Augmented metric graphs: models, points, tangent directions, refinement.

A :class:`MetricGraph` is a finite model ``G = (V, E)`` with exact rational
edge lengths and a nonnegative genus attached to every vertex.  Points of the
metric space are either vertices or positions strictly inside an edge,
measured from the edge's ``u`` endpoint.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from .rational import RationalLike, as_fraction


class GraphError(ValueError):
    """An augmented metric graph invariant is violated."""


@dataclass(frozen=True, order=True)
class Point:
    """A vertex, or an interior position on an edge.

    Build interior points through :meth:`MetricGraph.point` so that endpoint
    offsets collapse to vertices; two points are equal iff their canonical
    forms agree.
    """

    kind: int  # 0 = vertex, 1 = edge interior; keeps vertices first in sort order
    name: str
    offset: Fraction = Fraction(0)

    @classmethod
    def vertex(cls, vid: str) -> "Point":
        return cls(0, vid)

    @classmethod
    def interior(cls, edge: str, offset: RationalLike) -> "Point":
        return cls(1, edge, as_fraction(offset))

    @property
    def is_vertex(self) -> bool:
        return self.kind == 0

    @property
    def edge(self) -> Optional[str]:
        return self.name if self.kind == 1 else None

    def __str__(self) -> str:
        if self.is_vertex:
            return self.name
        return f"{self.name}@{self.offset}"

    def __repr__(self) -> str:
        return f"Point({str(self)!r})"

    def to_json(self) -> dict:
        from .rational import fmt

        if self.is_vertex:
            return {"vertex": self.name}
        return {"edge": self.name, "offset": fmt(self.offset)}


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: Fraction

    def other(self, w: str) -> str:
        if w == self.u:
            return self.v
        if w == self.v:
            return self.u
        raise KeyError(f"{w} is not an endpoint of edge {self.id}")


@dataclass(frozen=True, order=True)
class TangentDirection:
    """An outgoing unit tangent direction at ``base``.

    ``sign = +1`` points along the edge towards its ``v`` end (increasing
    offset), ``sign = -1`` towards its ``u`` end.
    """

    base: Point
    edge: str
    sign: int

    def __str__(self) -> str:
        return f"{self.base}->{self.edge}{'+' if self.sign > 0 else '-'}"


class Divisor(Mapping[Point, int]):
    """Finite formal sum of points with integer (or, for diagnostics, rational)
    coefficients.  Zero coefficients are dropped; instances are hashable."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, coeffs: Union[Mapping[Point, int], Iterable[Tuple[Point, int]], None] = None):
        acc: Dict[Point, int] = {}
        if coeffs is not None:
            items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
            for p, c in items:
                if not isinstance(p, Point):
                    raise TypeError(f"divisor keys must be Points, got {p!r}")
                acc[p] = acc.get(p, 0) + c
        self._items = tuple(sorted((p, c) for p, c in acc.items() if c != 0))
        self._map = dict(self._items)
        self._hash = None

    @classmethod
    def of(cls, *terms: Tuple[Point, int]) -> "Divisor":
        return cls(list(terms))

    def __getitem__(self, p: Point):
        return self._map[p]

    def get(self, p, default=0):
        return self._map.get(p, default)

    def coefficient(self, p: Point):
        return self._map.get(p, 0)

    def __iter__(self) -> Iterator[Point]:
        return (p for p, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Divisor):
            return self._items == other._items
        return NotImplemented

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(list(self._items) + list(other._items))

    def __sub__(self, other: "Divisor") -> "Divisor":
        return Divisor(list(self._items) + [(p, -c) for p, c in other._items])

    def __neg__(self) -> "Divisor":
        return Divisor([(p, -c) for p, c in self._items])

    def __mul__(self, k) -> "Divisor":
        return Divisor([(p, k * c) for p, c in self._items])

    __rmul__ = __mul__

    @property
    def degree(self):
        return sum(c for _, c in self._items)

    @property
    def support(self) -> Tuple[Point, ...]:
        return tuple(p for p, _ in self._items)

    def is_effective(self, away_from: Optional[Point] = None) -> bool:
        return all(c >= 0 for p, c in self._items if p != away_from)

    def __repr__(self) -> str:
        if not self._items:
            return "Divisor(0)"
        terms = " + ".join(f"{c}({p})" for p, c in self._items)
        return f"Divisor({terms})"


class MetricGraph:
    """A finite model of an augmented metric graph.

    ``vertices`` maps vertex ids to genera (or is a list of ids, all genus 0).
    ``edges`` is a sequence of ``(u, v, length)`` or ``(id, u, v, length)``
    tuples, or :class:`Edge` instances.  Parallel edges are allowed; loops are
    not (subdivide them).  Construction only checks referential integrity;
    call :func:`validate` for the full set of invariants.
    """

    def __init__(self, vertices, edges=()):
        if isinstance(vertices, Mapping):
            genus = {str(k): int(v) for k, v in vertices.items()}
        else:
            genus = {str(k): 0 for k in vertices}
        parsed: List[Edge] = []
        for i, e in enumerate(edges):
            if isinstance(e, Edge):
                parsed.append(Edge(e.id, e.u, e.v, as_fraction(e.length)))
            elif len(e) == 3:
                u, v, ln = e
                parsed.append(Edge(f"e{i}", str(u), str(v), as_fraction(ln)))
            elif len(e) == 4:
                eid, u, v, ln = e
                parsed.append(Edge(str(eid), str(u), str(v), as_fraction(ln)))
            else:
                raise GraphError(f"cannot parse edge {e!r}")
        ids = set()
        for e in parsed:
            if e.id in ids:
                raise GraphError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            for w in (e.u, e.v):
                if w not in genus:
                    raise GraphError(f"edge {e.id} references unknown vertex {w!r}")
        self._genus: Dict[str, int] = dict(sorted(genus.items()))
        self._edges: Dict[str, Edge] = {e.id: e for e in sorted(parsed, key=lambda e: e.id)}
        inc: Dict[str, List[str]] = {v: [] for v in self._genus}
        for e in self._edges.values():
            inc[e.u].append(e.id)
            if e.v != e.u:
                inc[e.v].append(e.id)
        self._incident = {v: tuple(sorted(ids)) for v, ids in inc.items()}
        self._key = (
            tuple(self._genus.items()),
            tuple((e.id, e.u, e.v, e.length) for e in self._edges.values()),
        )

    # -- basic accessors -------------------------------------------------
    @property
    def vertices(self) -> Tuple[str, ...]:
        return tuple(self._genus)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple(self._edges.values())

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        return tuple(self._edges)

    def edge(self, eid: str) -> Edge:
        try:
            return self._edges[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def genus_of(self, v: str) -> int:
        return self._genus[v]

    @property
    def vertex_genera(self) -> Dict[str, int]:
        return dict(self._genus)

    def incident(self, v: str) -> Tuple[str, ...]:
        return self._incident[v]

    def valence(self, v: str) -> int:
        return len(self._incident[v])

    def length(self, eid: str) -> Fraction:
        return self.edge(eid).length

    @property
    def total_length(self) -> Fraction:
        return sum((e.length for e in self._edges.values()), Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, MetricGraph) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"MetricGraph(|V|={len(self._genus)}, |E|={len(self._edges)})"

    # -- points ----------------------------------------------------------
    def point(self, where: Union[str, Point], offset: Optional[RationalLike] = None) -> Point:
        """Canonical point: ``point("x")`` is a vertex, ``point("e", t)`` a
        position on edge ``e`` (collapsing to an endpoint when ``t`` is 0 or
        the edge length)."""
        if isinstance(where, Point):
            return self.canonical(where)
        if offset is None:
            if where not in self._genus:
                raise GraphError(f"unknown vertex {where!r}")
            return Point.vertex(where)
        e = self.edge(where)
        t = as_fraction(offset)
        if t < 0 or t > e.length:
            raise GraphError(f"offset {t} outside edge {e.id} of length {e.length}")
        if t == 0:
            return Point.vertex(e.u)
        if t == e.length:
            return Point.vertex(e.v)
        return Point.interior(e.id, t)

    def canonical(self, p: Point) -> Point:
        if p.is_vertex:
            if p.name not in self._genus:
                raise GraphError(f"unknown vertex {p.name!r}")
            return p
        return self.point(p.name, p.offset)

    def contains(self, p: Point) -> bool:
        try:
            self.canonical(p)
        except GraphError:
            return False
        return True

    def parse_point(self, text: str) -> Point:
        """``"x"`` names a vertex, ``"e1@3/2"`` a position on edge ``e1``."""
        if "@" in text and text not in self._genus:
            eid, _, t = text.rpartition("@")
            return self.point(eid, t)
        return self.point(text)

    def tangent_directions(self, p: Point) -> List[TangentDirection]:
        """Outgoing directions at ``p`` in a fixed order (by edge id, then
        sign)."""
        p = self.canonical(p)
        if not p.is_vertex:
            return [TangentDirection(p, p.name, -1), TangentDirection(p, p.name, +1)]
        out = []
        for eid in self._incident[p.name]:
            e = self._edges[eid]
            out.append(TangentDirection(p, eid, +1 if e.u == p.name else -1))
        return out

    def point_valence(self, p: Point) -> int:
        p = self.canonical(p)
        return self.valence(p.name) if p.is_vertex else 2

    def endpoint_towards(self, d: TangentDirection) -> Tuple[str, Fraction]:
        """The model vertex reached by walking from ``d.base`` along ``d`` and
        the distance to it."""
        e = self._edges[d.edge]
        if d.base.is_vertex:
            t0 = Fraction(0) if d.sign > 0 else e.length
        else:
            t0 = d.base.offset
        if d.sign > 0:
            return e.v, e.length - t0
        return e.u, t0

    def arc_label(self, d: TangentDirection) -> str:
        e = self._edges[d.edge]
        tail, head = (e.u, e.v) if d.sign > 0 else (e.v, e.u)
        return f"{tail}->{head}"

    # -- structure -------------------------------------------------------
    def neighbors(self, v: str) -> List[Tuple[str, Edge]]:
        return [(self._edges[eid].other(v), self._edges[eid]) for eid in self._incident[v]]

    def components(self) -> List[Tuple[str, ...]]:
        seen, comps = set(), []
        for s in self._genus:
            if s in seen:
                continue
            comp, queue = [], deque([s])
            seen.add(s)
            while queue:
                w = queue.popleft()
                comp.append(w)
                for u, _ in self.neighbors(w):
                    if u not in seen:
                        seen.add(u)
                        queue.append(u)
            comps.append(tuple(sorted(comp)))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def is_simple(self) -> bool:
        pairs = set()
        for e in self._edges.values():
            key = frozenset((e.u, e.v))
            if e.u == e.v or key in pairs:
                return False
            pairs.add(key)
        return True

    def without_edge(self, eid: str) -> "MetricGraph":
        """Remove the open edge ``eid`` (endpoints stay)."""
        self.edge(eid)
        return MetricGraph(self._genus, [e for e in self._edges.values() if e.id != eid])

    def to_json(self) -> dict:
        from .rational import fmt

        return {
            "vertices": [{"id": v, "genus": g} for v, g in self._genus.items()],
            "edges": [
                {"id": e.id, "u": e.u, "v": e.v, "length": fmt(e.length)} for e in self._edges.values()
            ],
        }


# ---------------------------------------------------------------------------
# operations


def validate(graph: MetricGraph, simple: bool = False) -> None:
    """Raise :class:`GraphError` naming the first violated invariant.

    Loops, nonpositive lengths, negative genera and disconnection are always
    rejected.  Parallel edges are accepted unless ``simple=True``.
    """
    for v, g in graph.vertex_genera.items():
        if g < 0:
            raise GraphError(f"vertex {v} has negative genus {g}")
    seen = {}
    for e in graph.edges:
        if e.u == e.v:
            raise GraphError(f"edge {e.id} is a loop at {e.u}; subdivide it into a cycle of length >= 3")
        if e.length <= 0:
            raise GraphError(f"edge {e.id} has nonpositive length {e.length}")
        key = frozenset((e.u, e.v))
        if simple and key in seen:
            raise GraphError(
                f"edges {seen[key]} and {e.id} are parallel; subdivide one of them to get a simple model"
            )
        seen.setdefault(key, e.id)
    if not graph.vertices:
        raise GraphError("graph has no vertices")
    if not graph.is_connected():
        comps = graph.components()
        raise GraphError(f"graph is disconnected ({len(comps)} components)")


def genus(graph: MetricGraph) -> Tuple[int, int]:
    """``(first Betti number, total genus)``."""
    b1 = len(graph.edges) - len(graph.vertices) + len(graph.components())
    return b1, b1 + sum(graph.vertex_genera.values())


def canonical_divisor(graph: MetricGraph) -> Divisor:
    """``K_X = sum (2 g_x - 2 + val(x)) (x)`` over model vertices."""
    return Divisor(
        (Point.vertex(v), 2 * g - 2 + graph.valence(v)) for v, g in graph.vertex_genera.items()
    )


def graph_canonical_divisor(graph: MetricGraph) -> Divisor:
    """``K_Gamma = sum (val(x) - 2) (x)``, the canonical divisor of the
    unaugmented metric graph."""
    return Divisor((Point.vertex(v), graph.valence(v) - 2) for v in graph.vertices)


def genus_divisor(graph: MetricGraph) -> Divisor:
    """``K_g = sum g_x (x)``."""
    return Divisor((Point.vertex(v), g) for v, g in graph.vertex_genera.items())


def tangent_directions(graph: MetricGraph, p: Point) -> List[TangentDirection]:
    return graph.tangent_directions(p)


# ---------------------------------------------------------------------------
# refinement


@dataclass
class Refinement:
    """A refined model together with point maps in both directions."""

    original: MetricGraph
    graph: MetricGraph
    # edge id in the original -> list of (start offset, new edge id, reversed?)
    pieces: Dict[str, List[Tuple[Fraction, str]]] = field(default_factory=dict)
    # new edge id -> (original edge id, start offset)
    origin: Dict[str, Tuple[str, Fraction]] = field(default_factory=dict)

    def to_new(self, p: Point) -> Point:
        p = self.original.canonical(p)
        if p.is_vertex:
            return p
        pieces = self.pieces[p.name]
        for start, nid in reversed(pieces):
            if p.offset >= start:
                return self.graph.point(nid, p.offset - start)
        raise AssertionError("unreachable")

    def to_old(self, p: Point) -> Point:
        p = self.graph.canonical(p)
        if p.is_vertex:
            if p.name in self.original.vertex_genera:
                return p
            eid, t = _split_vertex_id(p.name)
            return self.original.point(eid, t)
        eid, start = self.origin[p.name]
        return self.original.point(eid, start + p.offset)

    def direction_to_new(self, d: TangentDirection) -> TangentDirection:
        base = self.to_new(d.base)
        for nd in self.graph.tangent_directions(base):
            if self.direction_to_old(nd) == TangentDirection(self.original.canonical(d.base), d.edge, d.sign):
                return nd
        raise AssertionError(f"direction {d} lost in refinement")

    def direction_to_old(self, d: TangentDirection) -> TangentDirection:
        eid, _ = self.origin[d.edge]
        return TangentDirection(self.to_old(d.base), eid, d.sign)


def _vertex_id(eid: str, t: Fraction) -> str:
    return f"{eid}@{t}"


def _split_vertex_id(vid: str) -> Tuple[str, Fraction]:
    eid, _, t = vid.rpartition("@")
    return eid, Fraction(t)


def refine(graph: MetricGraph, points: Iterable[Point]) -> Refinement:
    """Subdivide edges so that every given point becomes a vertex.

    New vertices have genus 0 and ids ``"<edge>@<offset>"``; an edge split
    into ``k`` pieces yields ids ``"<edge>.0" ... "<edge>.<k-1>"`` ordered
    from its ``u`` end.  Unsplit edges keep their id.
    """
    cuts: Dict[str, set] = {eid: set() for eid in graph.edge_ids}
    for p in points:
        p = graph.canonical(p)
        if not p.is_vertex:
            cuts[p.name].add(p.offset)
    genera = graph.vertex_genera
    new_edges: List[Edge] = []
    pieces: Dict[str, List[Tuple[Fraction, str]]] = {}
    origin: Dict[str, Tuple[str, Fraction]] = {}
    for e in graph.edges:
        ts = sorted(cuts[e.id])
        if not ts:
            new_edges.append(e)
            pieces[e.id] = [(Fraction(0), e.id)]
            origin[e.id] = (e.id, Fraction(0))
            continue
        stops = [Fraction(0)] + ts + [e.length]
        names = [e.u] + [_vertex_id(e.id, t) for t in ts] + [e.v]
        for t in ts:
            genera[_vertex_id(e.id, t)] = 0
        pieces[e.id] = []
        for i in range(len(stops) - 1):
            nid = f"{e.id}.{i}"
            new_edges.append(Edge(nid, names[i], names[i + 1], stops[i + 1] - stops[i]))
            pieces[e.id].append((stops[i], nid))
            origin[nid] = (e.id, stops[i])
    new = MetricGraph(genera, new_edges)
    return Refinement(graph, new, pieces, origin)


def subdivide(graph: MetricGraph, mesh: RationalLike) -> Refinement:
    """Refine so that every edge has length at most ``mesh`` (equal pieces)."""
    h = as_fraction(mesh)
    if h <= 0:
        raise GraphError("mesh must be positive")
    pts = []
    for e in graph.edges:
        k = -(-e.length // h)  # ceil
        k = int(k)
        for i in range(1, k):
            pts.append(graph.point(e.id, e.length * i / k))
    return refine(graph, pts)


def distance_on_edge(graph: MetricGraph, p: Point, q: Point) -> Optional[Fraction]:
    """Distance between two points measured inside one closed edge, if they
    share one (the shortest such edge)."""
    best = None
    for eid in graph.edge_ids:
        tp, tq = _offset_on(graph, p, eid), _offset_on(graph, q, eid)
        if tp is None or tq is None:
            continue
        d = abs(tp - tq)
        if best is None or d < best:
            best = d
    return best


def _offset_on(graph: MetricGraph, p: Point, eid: str) -> Optional[Fraction]:
    e = graph.edge(eid)
    if p.is_vertex:
        if p.name == e.u:
            return Fraction(0)
        if p.name == e.v:
            return e.length
        return None
    return p.offset if p.name == eid else None
