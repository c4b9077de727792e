"""Rank functions on hypercubes and slope structures on metric graphs.

A rank function lives on ``Box^d_r = {0..r}^d``.  A slope structure of width
``r`` attaches ``r + 1`` increasing integer slopes to every oriented model edge
and a rank function to every model vertex; interior points implicitly carry
the standard rank function on ``Box^2_r``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .functions import PLFunction, lower_envelope
from .graph import Divisor, GraphError, MetricGraph, Point, TangentDirection, refine
from .linalg import rank as matrix_rank

Index = Tuple[int, ...]


class SlopeStructureError(ValueError):
    pass


class SearchLimitExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# rank functions


def box(d: int, r: int) -> Iterator[Index]:
    return itertools.product(range(r + 1), repeat=d)


@dataclass(frozen=True)
class RankFunction:
    d: int
    r: int
    table: Tuple[Tuple[Index, int], ...]

    @classmethod
    def from_mapping(cls, d: int, r: int, values: Mapping[Index, int]) -> "RankFunction":
        missing = [i for i in box(d, r) if tuple(i) not in values]
        if missing:
            raise SlopeStructureError(f"rank table is missing {missing[0]}")
        return cls(d, r, tuple((tuple(i), int(values[tuple(i)])) for i in box(d, r)))

    def __call__(self, i: Sequence[int]) -> int:
        return self.as_dict()[tuple(i)]

    def as_dict(self) -> Dict[Index, int]:
        cache = self.__dict__.get("_dict")
        if cache is None:
            cache = dict(self.table)
            object.__setattr__(self, "_dict", cache)
        return cache

    def violation(self) -> Optional[str]:
        """First violated axiom, or ``None`` for a valid rank function."""
        rho, d, r = self.as_dict(), self.d, self.r
        for i, v in rho.items():
            if not (-1 <= v <= r):
                return f"value {v} at {i} outside [-1, {r}]"
        zero = (0,) * d
        if rho[zero] != r:
            return f"normalization: rho(0) = {rho[zero]} != {r}"
        if r > 0:
            for m in range(d):
                e = _unit(d, m)
                if rho[e] != r - 1:
                    return f"normalization: rho(e_{m}) = {rho[e]} != {r - 1}"
        for i in rho:
            for m in range(d):
                if i[m] < r:
                    j = _bump(i, m)
                    if rho[j] > rho[i]:
                        return f"monotonicity: rho{j} > rho{i}"
        keys = list(rho)
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                i, j = keys[a], keys[b]
                join = tuple(max(x, y) for x, y in zip(i, j))
                meet = tuple(min(x, y) for x, y in zip(i, j))
                if rho[i] + rho[j] > rho[join] + rho[meet]:
                    return f"supermodularity fails at {i}, {j}"
        return None

    def is_valid(self) -> bool:
        return self.violation() is None

    def jumps(self) -> frozenset:
        rho, d, r = self.as_dict(), self.d, self.r
        out = set()
        for i, v in rho.items():
            if v < 0:
                continue
            if all(rho[_bump(i, m)] == v - 1 for m in range(d) if i[m] < r):
                out.add(i)
        return frozenset(out)


def _unit(d: int, m: int) -> Index:
    return tuple(int(k == m) for k in range(d))


def _bump(i: Index, m: int) -> Index:
    return i[:m] + (i[m] + 1,) + i[m + 1 :]


def is_rank_function(candidate: RankFunction) -> Tuple[bool, Optional[str]]:
    why = candidate.violation()
    return why is None, why


def standard_rank(d: int, r: int) -> RankFunction:
    return RankFunction.from_mapping(d, r, {i: max(-1, r - sum(i)) for i in box(d, r)})


def rank_from_jumps(d: int, r: int, jumps: Iterable[Sequence[int]]) -> RankFunction:
    """Rebuild the unique rank function with the given jump set."""
    J = {tuple(j) for j in jumps}
    order = sorted(box(d, r), key=lambda i: -sum(i))
    for c in range(r + 1):
        rho: Dict[Index, int] = {}
        for i in order:
            succ = [rho[_bump(i, m)] for m in range(d) if i[m] < r]
            if i in J:
                if not succ:
                    rho[i] = c
                elif len(set(succ)) == 1:
                    rho[i] = succ[0] + 1
                else:
                    break
            else:
                top = max(succ) if succ else -1
                rho[i] = top if top >= 0 else -1
        else:
            cand = RankFunction.from_mapping(d, r, rho)
            if cand.is_valid() and cand.jumps() == J:
                return cand
    raise SlopeStructureError("jump set does not come from a rank function")


def rank_from_filtrations(d: int, r: int, dims: Mapping[Sequence[int], int]) -> RankFunction:
    """``rho(i) = dim(F_{i_1} cap ... cap F_{i_d}) - 1`` from a table of
    intersection dimensions."""
    table = {tuple(i): int(v) - 1 for i, v in dims.items()}
    rho = RankFunction.from_mapping(d, r, table)
    why = rho.violation()
    if why:
        raise SlopeStructureError(f"dimension table is not induced by filtrations: {why}")
    return rho


def flag_dimensions(flags: Sequence[Sequence[Sequence[Fraction]]], r: int) -> Dict[Index, int]:
    """Intersection dimensions for complete flags in ``Q^(r+1)``.

    Each flag is a basis ``b_0..b_r``; its filtration is
    ``F_j = span(b_j, ..., b_r)``.  ``F_j`` is cut out by the first ``j``
    rows of the inverse basis matrix, so an intersection is the kernel of
    the stacked rows.
    """
    from .linalg import inverse

    duals = []
    for basis in flags:
        cols = [[Fraction(basis[j][i]) for j in range(r + 1)] for i in range(r + 1)]
        duals.append(inverse(cols))
    out = {}
    for i in box(len(flags), r):
        rows = [duals[m][k] for m, j in enumerate(i) for k in range(j)]
        out[i] = r + 1 - (matrix_rank(rows) if rows else 0)
    return out


# ---------------------------------------------------------------------------
# slope structures


Arc = Tuple[str, int]  # (model edge id, +1 for u->v or -1 for v->u)


class SlopeStructure:
    """Slopes per oriented model edge plus a rank function per model vertex.

    ``vertex_ranks[v]`` uses the coordinate order of
    ``graph.tangent_directions(v)``.
    """

    def __init__(
        self,
        graph: MetricGraph,
        r: int,
        arcs: Mapping[Arc, Sequence[int]],
        vertex_ranks: Optional[Mapping[str, RankFunction]] = None,
    ):
        self.graph = graph
        self.r = int(r)
        self.arcs: Dict[Arc, Tuple[int, ...]] = {(e, int(s)): tuple(int(x) for x in v) for (e, s), v in arcs.items()}
        ranks = dict(vertex_ranks or {})
        for v in graph.vertices:
            if v not in ranks:
                ranks[v] = standard_rank(graph.valence(v), self.r)
        self.vertex_ranks: Dict[str, RankFunction] = ranks

    def slopes(self, d: TangentDirection) -> Tuple[int, ...]:
        return self.arcs[(d.edge, d.sign)]

    def rank_at(self, p: Point) -> RankFunction:
        if p.is_vertex:
            return self.vertex_ranks[p.name]
        return standard_rank(2, self.r)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SlopeStructure)
            and self.graph == other.graph
            and self.r == other.r
            and self.arcs == other.arcs
            and self.vertex_ranks == other.vertex_ranks
        )

    def __repr__(self) -> str:
        return f"SlopeStructure(r={self.r}, arcs={len(self.arcs)})"

    def to_json(self) -> dict:
        arcs = []
        for (eid, s), sl in sorted(self.arcs.items()):
            e = self.graph.edge(eid)
            tail, head = (e.u, e.v) if s > 0 else (e.v, e.u)
            arcs.append({"arc": f"{tail}->{head}", "edge": eid, "slopes": list(sl)})
        verts = [
            {"vertex": v, "jumps": [list(j) for j in sorted(rf.jumps())]} for v, rf in self.vertex_ranks.items()
        ]
        return {"r": self.r, "arcs": arcs, "vertices": verts}

    @classmethod
    def from_json(cls, graph: MetricGraph, data: dict) -> "SlopeStructure":
        r = int(data["r"])
        arcs = {}
        for item in data["arcs"]:
            tail, _, head = item["arc"].partition("->")
            if "edge" in item:
                eid = item["edge"]
            else:
                cands = [e.id for e in graph.edges if {e.u, e.v} == {tail, head}]
                if len(cands) != 1:
                    raise SlopeStructureError(f"arc {item['arc']} is ambiguous; give its edge id")
                eid = cands[0]
            e = graph.edge(eid)
            if (tail, head) == (e.u, e.v):
                sign = 1
            elif (tail, head) == (e.v, e.u):
                sign = -1
            else:
                raise SlopeStructureError(f"arc {item['arc']} does not match edge {eid}")
            arcs[(eid, sign)] = item["slopes"]
        ranks = {}
        for item in data.get("vertices", []):
            v = item["vertex"]
            ranks[v] = rank_from_jumps(graph.valence(v), r, item["jumps"])
        return cls(graph, r, arcs, ranks)


def validate_slope_structure(graph: MetricGraph, S: SlopeStructure) -> None:
    """Raise :class:`SlopeStructureError` describing the first violation."""
    if S.graph != graph:
        raise SlopeStructureError("slope structure lives on a different model")
    r = S.r
    for e in graph.edges:
        for sign in (1, -1):
            sl = S.arcs.get((e.id, sign))
            if sl is None:
                raise SlopeStructureError(f"missing slopes for arc {(e.id, sign)}")
            if len(sl) != r + 1:
                raise SlopeStructureError(f"arc {(e.id, sign)} has {len(sl)} slopes, expected {r + 1}")
            if any(a >= b for a, b in zip(sl, sl[1:])):
                raise SlopeStructureError(f"arc {(e.id, sign)} slopes {sl} are not strictly increasing")
        fwd, bwd = S.arcs[(e.id, 1)], S.arcs[(e.id, -1)]
        for i in range(r + 1):
            if fwd[i] + bwd[r - i] != 0:
                raise SlopeStructureError(
                    f"antisymmetry fails on edge {e.id}: s_{i} + s'_{r - i} = {fwd[i] + bwd[r - i]}"
                )
    for v in graph.vertices:
        rf = S.vertex_ranks[v]
        if rf.d != graph.valence(v) or rf.r != r:
            raise SlopeStructureError(f"rank function at {v} has shape ({rf.d}, {rf.r})")
        why = rf.violation()
        if why:
            raise SlopeStructureError(f"rank function at {v}: {why}")


def slope_vector(f: PLFunction, p: Point) -> List[Fraction]:
    return f.slopes_at(p)


def index_vector(S: SlopeStructure, f: PLFunction, p: Point) -> Optional[Index]:
    """Indices of the outgoing slopes of ``f`` at ``p`` inside the slope sets,
    or ``None`` if some slope is not allowed."""
    out = []
    for d in S.graph.tangent_directions(p):
        s = f.slope(d)
        sl = S.slopes(d)
        if s.denominator != 1 or int(s) not in sl:
            return None
        out.append(sl.index(int(s)))
    return tuple(out)


def is_compatible(f: PLFunction, S: SlopeStructure) -> bool:
    """Every outgoing slope lies in its arc set and every slope vector is a
    jump of the local rank function."""
    if f.graph != S.graph:
        raise GraphError("function and slope structure live on different models")
    for p in f.breakpoints():
        idx = index_vector(S, f, p)
        if idx is None or idx not in S.rank_at(p).jumps():
            return False
    return True


# ---------------------------------------------------------------------------
# exhaustive search over grid-compatible functions


class _GridSearch:
    """Functions affine on each grid segment, with slopes from the arc sets
    and breakpoints only at grid points, normalized to vanish at ``root``."""

    def __init__(self, S: SlopeStructure, grid: Iterable[Point], root: Point, max_states: int):
        model = S.graph
        self.S = S
        self.max_states = max_states
        self.ref = refine(model, list(grid) + [root] + [Point.vertex(v) for v in model.vertices])
        R = self.ref.graph
        self.R = R
        self.root = self.ref.to_new(root).name
        # per refined vertex: list of (edge id, sign, slope set) in model coordinate order
        self.dirs: Dict[str, List[Tuple[str, int, Tuple[int, ...]]]] = {}
        self.ranks: Dict[str, RankFunction] = {}
        self.old: Dict[str, Point] = {}
        for w in R.vertices:
            p_old = self.ref.to_old(Point.vertex(w))
            self.old[w] = p_old
            model_dirs = model.tangent_directions(p_old)
            new_dirs = R.tangent_directions(Point.vertex(w))
            by_old = {self.ref.direction_to_old(nd): nd for nd in new_dirs}
            row = []
            for md in model_dirs:
                nd = by_old[TangentDirection(p_old, md.edge, md.sign)]
                row.append((nd.edge, nd.sign, S.slopes(md)))
            self.dirs[w] = row
            self.ranks[w] = S.rank_at(p_old)
        self._jumps = {w: rf.jumps() for w, rf in self.ranks.items()}
        # breadth-first order and tree parents
        order, parent, seen = [self.root], {}, {self.root}
        k = 0
        while k < len(order):
            w = order[k]
            k += 1
            for eid in R.incident(w):
                o = R.edge(eid).other(w)
                if o not in seen:
                    seen.add(o)
                    parent[o] = eid
                    order.append(o)
        if len(order) != len(R.vertices):
            raise GraphError("grid search needs a connected graph")
        self.order = order
        self.parent = parent
        pos = {w: i for i, w in enumerate(order)}
        self.ready: List[List[str]] = [[] for _ in order]
        for w in order:
            last = max([pos[w]] + [pos[R.edge(eid).other(w)] for eid in R.incident(w)])
            self.ready[last].append(w)

    def _out_slope(self, vals, w, eid, sign) -> Fraction:
        e = self.R.edge(eid)
        return (vals[e.other(w)] - vals[w]) / e.length

    def _vertex_ok(self, vals, w, D: Mapping[str, int], E: Mapping[str, int]) -> bool:
        idx, total = [], Fraction(0)
        for eid, sign, sl in self.dirs[w]:
            s = self._out_slope(vals, w, eid, sign)
            if s.denominator != 1 or int(s) not in sl:
                return False
            idx.append(sl.index(int(s)))
            total += s
        idx = tuple(idx)
        if idx not in self._jumps[w]:
            return False
        e_w = E.get(w, 0)
        if self.ranks[w](idx) < e_w:
            return False
        return D.get(w, 0) - total - e_w >= 0

    def functions(self, D: Divisor, E: Divisor) -> Iterator[Dict[str, Fraction]]:
        Dn = {self.ref.to_new(p).name: c for p, c in D.items()}
        En = {self.ref.to_new(p).name: c for p, c in E.items()}
        for p in list(D) + list(E):
            if not self.ref.to_new(p).is_vertex:
                raise GraphError(f"point {p} is not on the grid")
        R, order = self.R, self.order
        vals: Dict[str, Fraction] = {self.root: Fraction(0)}
        states = [0]

        def checks(k) -> bool:
            return all(self._vertex_ok(vals, w, Dn, En) for w in self.ready[k])

        def rec(k):
            if k == len(order):
                yield dict(vals)
                return
            w = order[k]
            eid = self.parent[w]
            e = R.edge(eid)
            p = e.other(w)
            sign = 1 if e.u == p else -1
            model_edge, _ = self.ref.origin[eid]
            for s in self.S.arcs[(model_edge, sign)]:
                states[0] += 1
                if states[0] > self.max_states:
                    raise SearchLimitExceeded(f"search exceeded {self.max_states} states")
                vals[w] = vals[p] + s * e.length
                if checks(k):
                    yield from rec(k + 1)
                del vals[w]

        if checks(0):
            yield from rec(1)

    def to_function(self, vals: Mapping[str, Fraction]) -> PLFunction:
        return PLFunction.from_point_values(self.S.graph, {self.old[w]: y for w, y in vals.items()})


def _grid_points(S: SlopeStructure, grid: Optional[Iterable[Point]]) -> List[Point]:
    pts = [Point.vertex(v) for v in S.graph.vertices]
    if grid is not None:
        pts += [S.graph.canonical(p) for p in grid]
    return sorted(set(pts))


def effective_divisors(points: Sequence[Point], degree: int) -> Iterator[Divisor]:
    for combo in itertools.combinations_with_replacement(points, degree):
        yield Divisor((p, 1) for p in combo)


def compatible_functions(
    S: SlopeStructure,
    D: Divisor,
    grid: Optional[Iterable[Point]] = None,
    E: Optional[Divisor] = None,
    root: Optional[Point] = None,
    max_states: int = 1_000_000,
) -> Iterator[PLFunction]:
    """All grid functions ``f`` in ``Rat(S)`` with ``f(root) = 0``,
    ``rho_x(delta_x f) >= E(x)`` and ``div f + D - E >= 0``."""
    pts = _grid_points(S, grid)
    root = S.graph.canonical(root) if root is not None else pts[0]
    search = _GridSearch(S, pts, root, max_states)
    for vals in search.functions(D, E or Divisor()):
        yield search.to_function(vals)


def grd_certificate(S, D, E, grid=None, max_states=1_000_000) -> Optional[PLFunction]:
    return next(compatible_functions(S, D, grid, E, max_states=max_states), None)


def is_grd(
    graph: MetricGraph,
    D: Divisor,
    S: SlopeStructure,
    grid: Optional[Iterable[Point]] = None,
    max_states: int = 1_000_000,
) -> bool:
    """Check property (*) for every effective ``E`` of degree ``r`` supported
    on grid points."""
    return not grd_failures(graph, D, S, grid, max_states, first_only=True)


def grd_failures(graph, D, S, grid=None, max_states=1_000_000, first_only=False) -> List[Divisor]:
    if S.graph != graph:
        raise GraphError("slope structure lives on a different model")
    pts = _grid_points(S, grid)
    search = _GridSearch(S, pts, pts[0], max_states)
    bad = []
    for E in effective_divisors(pts, S.r):
        if next(search.functions(D, E), None) is None:
            bad.append(E)
            if first_only:
                break
    return bad


@dataclass
class ReducedResult:
    divisor: Divisor
    function: PLFunction
    coefficient: int
    expected: int

    @property
    def ok(self) -> bool:
        return self.coefficient == self.expected


def reduced_wrt(
    graph: MetricGraph,
    D: Divisor,
    S: SlopeStructure,
    v: Point,
    grid: Optional[Iterable[Point]] = None,
    max_states: int = 1_000_000,
) -> ReducedResult:
    """``f_v = min over Rat(D; S) of f - f(v)`` on the grid and
    ``D_v = D + div f_v``.

    ``expected`` is ``D(v) - sum of the smallest slopes at v``; the result
    raises if ``D_v(v)`` disagrees with it or falls below ``r``.
    """
    from .divisors import div

    if not is_grd(graph, D, S, grid, max_states):
        raise SlopeStructureError("(D, S) fails property (*) on this grid")
    v = graph.canonical(v)
    fs = list(compatible_functions(S, D, grid, root=v, max_states=max_states))
    fv = lower_envelope(fs)
    Dv = D + div(fv)
    expected = D.coefficient(v) - sum(S.slopes(d)[0] for d in graph.tangent_directions(v))
    got = Dv.coefficient(v)
    if got != expected or got < S.r or not Dv.is_effective():
        raise SlopeStructureError(f"reduced coefficient check failed at {v}: {got} vs {expected}, r = {S.r}")
    return ReducedResult(Dv, fv, got, expected)


# ---------------------------------------------------------------------------
# linear equivalence


def _model_slopes(f: PLFunction) -> Dict[str, int]:
    """Slope along each model edge (towards ``v``) of a function affine on
    every model edge."""
    out = {}
    for e in f.graph.edges:
        pts = f.edge_breaks(e.id)
        if len(pts) != 2:
            raise SlopeStructureError(f"function has a breakpoint inside edge {e.id}")
        s = (pts[1][1] - pts[0][1]) / e.length
        if s.denominator != 1:
            raise SlopeStructureError(f"non-integer slope on edge {e.id}")
        out[e.id] = int(s)
    return out


def shift(S: SlopeStructure, f: PLFunction) -> SlopeStructure:
    """``S - slope(f)`` arcwise; rank functions (in index form) are
    unchanged, the jump vectors in slope form move by ``delta_x f``."""
    sl = _model_slopes(f)
    arcs = {}
    for (eid, sign), vals in S.arcs.items():
        arcs[(eid, sign)] = tuple(x - sign * sl[eid] for x in vals)
    out = SlopeStructure(S.graph, S.r, arcs, S.vertex_ranks)
    for e in S.graph.edges:
        fwd, bwd = out.arcs[(e.id, 1)], out.arcs[(e.id, -1)]
        assert all(fwd[i] + bwd[S.r - i] == 0 for i in range(S.r + 1)), "shift broke antisymmetry"
    return out


def equivalence_witness(
    graph: MetricGraph, first: Tuple[Divisor, SlopeStructure], second: Tuple[Divisor, SlopeStructure]
) -> Optional[PLFunction]:
    """A function ``f`` with ``D1 = D2 + div f`` and ``S1 = S2 + div f``, or
    ``None``.  The arc shifts pin down every slope of ``f``; what remains is
    to check they integrate around cycles and reproduce ``D1 - D2``."""
    from .divisors import div

    (D1, S1), (D2, S2) = first, second
    if S1.r != S2.r or S1.vertex_ranks != S2.vertex_ranks:
        return None
    slope = {}
    for e in graph.edges:
        a = [y - x for x, y in zip(S1.arcs[(e.id, 1)], S2.arcs[(e.id, 1)])]
        if len(set(a)) != 1:
            return None
        slope[e.id] = a[0]
    vals = {graph.vertices[0]: Fraction(0)}
    stack = [graph.vertices[0]]
    while stack:
        w = stack.pop()
        for eid in graph.incident(w):
            e = graph.edge(eid)
            o = e.other(w)
            s = slope[eid] if e.u == w else -slope[eid]
            y = vals[w] + s * e.length
            if o in vals:
                if vals[o] != y:
                    return None
            else:
                vals[o] = y
                stack.append(o)
    if len(vals) != len(graph.vertices):
        return None
    f = PLFunction(graph, vals)
    if D1 != D2 + div(f):
        return None
    return f


def is_equivalent(graph, first, second) -> bool:
    return equivalence_witness(graph, first, second) is not None
