"""Divisors of PL functions, reduced divisors via metric burning, and rank.

Reduction runs on the given model with chips at arbitrary rational points.
Each round burns from the base point (a point burns once the fires reaching
it outnumber its chips) and then fires the whole unburnt set until the first
chip hits a node.  The witness function is recovered afterwards from
``Delta f = D_v - D``.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from functools import reduce as _fold
from typing import Dict, List, Optional, Sequence, Tuple

from .functions import Measure, PLFunction
from .graph import Divisor, GraphError, MetricGraph, Point, genus, refine
from .potential import solve_poisson
from .rational import lcm

MAX_ROUNDS = 200_000


class ReductionError(RuntimeError):
    pass


def div(f: PLFunction) -> Divisor:
    """``div_x(f) = -sum of outgoing slopes of f at x``."""
    coeffs = {}
    for p in f.breakpoints():
        s = sum(f.slopes_at(p), Fraction(0))
        if s.denominator != 1:
            raise ValueError(f"non-integer slope sum {s} at {p}")
        if s:
            coeffs[p] = -int(s)
    if not f.has_integer_slopes():
        raise ValueError("function has a non-integer slope")
    return Divisor(coeffs)


# ---------------------------------------------------------------------------
# chip configurations on a model


class _Chips:
    """Integer chips at points of ``graph`` plus the node layout of the
    induced subdivision (vertices, chip positions and the base point)."""

    def __init__(self, graph: MetricGraph, chips: Dict[Point, int], base: Point):
        self.graph = graph
        self.chips = {p: c for p, c in chips.items() if c}
        self.base = base

    def layout(self):
        g = self.graph
        marks: Dict[str, set] = {}
        for p in list(self.chips) + [self.base]:
            if not p.is_vertex:
                marks.setdefault(p.name, set()).add(p.offset)
        # segment = (a, b, length, edge id, offset of a along the edge, direction)
        adj: Dict[Point, List[Tuple[Point, Fraction, str, Fraction, int]]] = {
            Point.vertex(v): [] for v in g.vertices
        }
        for e in g.edges:
            ts = sorted(marks.get(e.id, ()))
            nodes = [Point.vertex(e.u)] + [Point.interior(e.id, t) for t in ts] + [Point.vertex(e.v)]
            offs = [Fraction(0)] + ts + [e.length]
            for p in nodes[1:-1]:
                adj.setdefault(p, [])
            for i in range(len(nodes) - 1):
                a, b, ln = nodes[i], nodes[i + 1], offs[i + 1] - offs[i]
                adj[a].append((b, ln, e.id, offs[i], +1))
                adj[b].append((a, ln, e.id, offs[i + 1], -1))
        return adj

    def burn(self, adj) -> set:
        """Unburnt nodes after the fire from ``base`` has spread."""
        burnt = {self.base}
        hits: Dict[Point, int] = {}
        queue = deque([self.base])
        while queue:
            p = queue.popleft()
            for q, _, _, _, _ in adj[p]:
                if q in burnt:
                    continue
                hits[q] = hits.get(q, 0) + 1
                if hits[q] > self.chips.get(q, 0):
                    burnt.add(q)
                    queue.append(q)
        return set(adj) - burnt

    def fire(self, adj, unburnt: set) -> None:
        out = [(p, seg) for p in unburnt for seg in adj[p] if seg[0] not in unburnt]
        delta = min(seg[1] for _, seg in out)
        for p, (q, ln, eid, t0, sign) in out:
            self.chips[p] -= 1
            if not self.chips[p]:
                del self.chips[p]
            dest = self.graph.point(eid, t0 + sign * delta)
            self.chips[dest] = self.chips.get(dest, 0) + 1


def _make_effective_away(graph: MetricGraph, D: Divisor, v: Point) -> Divisor:
    """Greedy borrowing on the subdivision at ``supp(D) + v``: a vertex in debt
    takes ``c / len`` chips from each neighbour, with ``c`` chosen so these are
    integers.  Terminates by the least action principle because the base point
    never borrows."""
    ref = refine(graph, list(D.support) + [v])
    g = ref.graph
    chips = {w: 0 for w in g.vertices}
    for p, c in D.items():
        chips[ref.to_new(p).name] += c
    root = ref.to_new(v).name
    weights = {}
    for w in g.vertices:
        inc = [g.edge(eid) for eid in g.incident(w)]
        c = _fold(lcm, [e.length.numerator for e in inc], 1)
        weights[w] = [(e.other(w), int(c / e.length)) for e in inc]
    rounds = 0
    while True:
        debt = [w for w in g.vertices if w != root and chips[w] < 0]
        if not debt:
            break
        for w in debt:
            for o, k in weights[w]:
                chips[w] += k
                chips[o] -= k
        rounds += 1
        if rounds > MAX_ROUNDS:
            raise ReductionError("borrowing did not terminate")
    return Divisor((ref.to_old(Point.vertex(w)), c) for w, c in chips.items() if c)


def reduce_divisor(graph: MetricGraph, D: Divisor, v: Point) -> Divisor:
    """The ``v``-reduced divisor linearly equivalent to ``D``."""
    v = graph.canonical(v)
    D = Divisor((graph.canonical(p), c) for p, c in D.items())
    if not D.is_effective(away_from=v):
        if not graph.is_connected():
            raise GraphError("reduction needs a connected graph")
        D = _make_effective_away(graph, D, v)
    state = _Chips(graph, dict(D.items()), v)
    for _ in range(MAX_ROUNDS):
        adj = state.layout()
        unburnt = state.burn(adj)
        if not unburnt:
            return Divisor(state.chips)
        state.fire(adj, unburnt)
    raise ReductionError(f"reduction did not finish in {MAX_ROUNDS} rounds")


def witness(graph: MetricGraph, D: Divisor, E: Divisor, v: Point) -> PLFunction:
    """The PL function ``f`` with ``E = D + div f`` and ``f(v) = 0``."""
    diff = E - D
    if diff.degree != 0:
        raise ValueError("divisors have different degrees")
    pot = solve_poisson(graph, Measure.from_divisor(graph, diff), ground=v)
    f = pot.to_pl()
    if not f.has_integer_slopes():
        raise ValueError("divisors are not linearly equivalent")
    return f


def reduce(graph: MetricGraph, D: Divisor, v: Point) -> Tuple[Divisor, PLFunction]:
    """``(D_v, f)`` with ``D_v = D + div f`` the ``v``-reduced divisor and
    ``f(v) = 0``."""
    Dv = reduce_divisor(graph, D, v)
    return Dv, witness(graph, D, Dv, v)


def is_reduced(graph: MetricGraph, D: Divisor, v: Point) -> bool:
    v = graph.canonical(v)
    if not D.is_effective(away_from=v):
        return False
    state = _Chips(graph, dict(D.items()), v)
    return not state.burn(state.layout())


def linearly_equivalent(graph: MetricGraph, D1: Divisor, D2: Divisor) -> bool:
    if D1.degree != D2.degree:
        return False
    v = Point.vertex(graph.vertices[0])
    return reduce_divisor(graph, D1, v) == reduce_divisor(graph, D2, v)


# ---------------------------------------------------------------------------
# rank


class RankComputer:
    """Rank of divisors, testing effective ``E`` supported on ``grid``.

    Exact when ``grid`` contains a rank-determining set (the vertices of a
    loopless model do); otherwise an upper bound on what the test can see.
    Results are memoized per linear equivalence class.
    """

    def __init__(self, graph: MetricGraph, grid: Optional[Sequence[Point]] = None):
        self.graph = graph
        self.grid = sorted({graph.canonical(p) for p in grid}) if grid else [
            Point.vertex(v) for v in graph.vertices
        ]
        self.base = self.grid[0]
        self._memo: Dict[Divisor, int] = {}

    def rank(self, D: Divisor) -> int:
        if D.degree < 0:
            return -1
        Dv = reduce_divisor(self.graph, D, self.base)
        if Dv.coefficient(self.base) < 0:
            return -1
        return self._rank_effective(Dv)

    def _rank_effective(self, Dv: Divisor) -> int:
        # Dv is base-reduced and effective
        hit = self._memo.get(Dv)
        if hit is not None:
            return hit
        best = Dv.degree
        for p in self.grid:
            Dp = reduce_divisor(self.graph, Dv, p)
            if Dp.coefficient(p) == 0:
                best = 0
                break
            sub = reduce_divisor(self.graph, Dp - Divisor({p: 1}), self.base)
            best = min(best, 1 + self._rank_effective(sub))
            if best == 0:
                break
        self._memo[Dv] = best
        return best


def rank(graph: MetricGraph, D: Divisor, grid: Optional[Sequence[Point]] = None) -> int:
    return RankComputer(graph, grid).rank(D)


def riemann_roch_defect(graph: MetricGraph, D: Divisor, computer: Optional[RankComputer] = None) -> int:
    """``r(D) - r(K - D) - (deg D - g + 1)`` with ``K`` the valence canonical
    divisor of the underlying metric graph; zero by tropical Riemann-Roch."""
    from .graph import graph_canonical_divisor

    rc = computer or RankComputer(graph)
    b1, _ = genus(graph)
    K = graph_canonical_divisor(graph)
    return rc.rank(D) - rc.rank(K - D) - (D.degree - b1 + 1)
