"""Experiment harness: surrogate slope data, the measures mu_n, the per-edge
resistance law and the comparison of mu_n with the canonical admissible
measure.

In surrogate mode the smallest slope ``s_0`` along a direction at ``x`` is the
outgoing slope at ``x`` of the function taking ``nD`` to its ``x``-reduced
divisor.  This is a stand-in for slope data coming from an actual curve and
every report says so.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .divisors import RankComputer, reduce_divisor, witness
from .functions import Measure, PLFunction
from .graph import Divisor, MetricGraph, Point, TangentDirection, genus, refine, subdivide
from .jsonio import divisor_to_json
from .okounkov import FeketeViolation, SlopeFamily, fekete_limits, ks_uniformity, sminmax_gap, width_defect
from .potential import INFINITY, edge_resistance, solve_poisson, zhang_measure
from .rational import as_fraction, fmt
from .weierstrass import ArcKey, SlopeData, VertexSlopes, midpoint_weierstrass, reduce_weierstrass

SURROGATE_NOTE = (
    "tropical-surrogate: s_0 values are slopes of classical reduced-divisor witnesses, "
    "not slope data of a curve"
)


def _direction(graph: MetricGraph, x: str, eid: str) -> TangentDirection:
    e = graph.edge(eid)
    return TangentDirection(Point.vertex(x), eid, 1 if e.u == x else -1)


def model_for(graph: MetricGraph, D: Divisor):
    """Refinement of ``graph`` in which ``supp D`` consists of vertices."""
    return refine(graph, D.support)


def series_rank(graph: MetricGraph, D: Divisor, n: int, computer: Optional[RankComputer] = None) -> int:
    """``r_n``: ``nd - g`` once ``nd >= 2g - 1``, otherwise the rank of
    ``nD`` on model vertices."""
    _, g = genus(graph)
    nd = n * D.degree
    if nd >= 2 * g - 1:
        return nd - g
    rc = computer or RankComputer(graph)
    return rc.rank(D * n)


class ReducedFamily:
    """``x``-reduced divisors of ``nD`` for every vertex ``x`` of a model,
    built incrementally: ``D_{n,x} = reduce(D_{n-1,x} + D, x)``."""

    def __init__(self, model: MetricGraph, D: Divisor):
        self.model = model
        self.D = D
        self.current: Dict[str, Divisor] = {}
        self.n = 0

    def advance(self) -> Dict[str, Divisor]:
        self.n += 1
        out = {}
        for x in self.model.vertices:
            prev = self.current.get(x, Divisor())
            out[x] = reduce_divisor(self.model, prev + self.D, Point.vertex(x))
        self.current = out
        return out

    def witness(self, x: str) -> PLFunction:
        return witness(self.model, self.D * self.n, self.current[x], Point.vertex(x))


def slope_data_from_reductions(model: MetricGraph, D: Divisor, n: int, r: int, reduced: Dict[str, Divisor]):
    """Surrogate slope data plus the witnesses used to produce it."""
    verts, wits = {}, {}
    nD = D * n
    for x in model.vertices:
        f = witness(model, nD, reduced[x], Point.vertex(x))
        wits[x] = f
        dirs = {}
        for eid in model.incident(x):
            e = model.edge(eid)
            s = f.slope(_direction(model, x, eid))
            dirs[ArcKey(x, e.other(x), eid)] = (int(s),)
        verts[x] = VertexSlopes(x, nD.coefficient(Point.vertex(x)), model.genus_of(x), dirs)
    return SlopeData(n, r, verts), wits


def surrogate_slopes(graph: MetricGraph, D: Divisor, n: int) -> SlopeData:
    """``s_0`` along every direction at every vertex of the model where
    ``supp D`` has been made into vertices."""
    ref = model_for(graph, D)
    model = ref.graph
    Dm = Divisor((ref.to_new(p), c) for p, c in D.items())
    reduced = {x: reduce_divisor(model, Dm * n, Point.vertex(x)) for x in model.vertices}
    r = series_rank(model, Dm, n)
    return slope_data_from_reductions(model, Dm, n, r, reduced)[0]


def mesh_reductions(mesh_ref, D: Divisor, n: int, start: Dict[str, Divisor]) -> Dict[str, Divisor]:
    """``x``-reduced divisors of ``nD`` at every mesh vertex, walking outwards
    from the coarse vertices whose reductions are given in ``start``."""
    M = mesh_ref.graph
    G = mesh_ref.original
    out: Dict[str, Divisor] = {}
    queue = []
    for x, Dx in start.items():
        out[x] = Dx
        queue.append(x)
    k = 0
    while k < len(queue):
        w = queue[k]
        k += 1
        for o, _ in M.neighbors(w):
            if o in out:
                continue
            out[o] = reduce_divisor(G, out[w], mesh_ref.to_old(Point.vertex(o)))
            queue.append(o)
    return out


def mesh_slope_data(mesh_ref, D: Divisor, n: int, r: int, reduced: Dict[str, Divisor]) -> SlopeData:
    """Surrogate slope data on the mesh model (reductions live on the coarse
    graph; mesh directions are translated back to it)."""
    M, G = mesh_ref.graph, mesh_ref.original
    nD = D * n
    verts = {}
    for x in M.vertices:
        px = mesh_ref.to_old(Point.vertex(x))
        f = witness(G, nD, reduced[x], px)
        dirs = {}
        for eid in M.incident(x):
            e = M.edge(eid)
            d_old = mesh_ref.direction_to_old(_direction(M, x, eid))
            dirs[ArcKey(x, e.other(x), eid)] = (int(f.slope(d_old)),)
        verts[x] = VertexSlopes(x, nD.coefficient(px), M.genus_of(x), dirs)
    return SlopeData(n, r, verts)


def weierstrass_divisor(data: SlopeData) -> Divisor:
    return reduce_weierstrass(data) if data.mode == "full" else midpoint_weierstrass(data)


def mu_n(data: SlopeData, g: int, graph: MetricGraph, refinement=None, strict: bool = True) -> Measure:
    """``W_n / (g (r_n + 1)^2)`` as an atomic measure on ``graph``.

    ``refinement`` maps the slope-data model back to ``graph`` when the
    data lives on a finer model.  In surrogate mode a mass defect above
    ``2 g (r+1) / (g (r+1)^2)`` is an error.
    """
    W = weierstrass_divisor(data)
    norm = g * (data.r + 1) ** 2
    atoms = {}
    for p, c in W.items():
        q = refinement.to_old(p) if refinement is not None else p
        atoms[q] = atoms.get(q, Fraction(0)) + Fraction(c) / norm
    mu = Measure(graph, atoms)
    tol = Fraction(2 * g * (data.r + 1), norm)
    if strict and abs(mu.mass - 1) > tol:
        raise ValueError(f"mu_n mass {mu.mass} deviates from 1 by more than {tol}")
    return mu


# ---------------------------------------------------------------------------
# comparing measures


def binned_cells(graph: MetricGraph, h: Fraction):
    """Vertex cells plus half-open segments ``[t_j, t_{j+1})`` of length at
    most ``h`` along every edge (the first segment starts open at the
    vertex)."""
    cells = [("vertex", v) for v in graph.vertices]
    for e in graph.edges:
        k = -(-e.length // h)
        k = int(k)
        for j in range(k):
            cells.append(("edge", e.id, e.length * j / k, e.length * (j + 1) / k))
    return cells


def binned_l1(graph: MetricGraph, mu: Measure, nu: Measure, h: Fraction) -> Fraction:
    diff = mu - nu
    total = Fraction(0)
    for cell in binned_cells(graph, h):
        if cell[0] == "vertex":
            m = diff.atoms.get(Point.vertex(cell[1]), Fraction(0))
        else:
            _, eid, a, b = cell
            m = diff.edge_mass(eid, a, b, closed_left=a > 0)
        total += abs(m)
    return total


def compare_measures(mu: Measure, nu: Measure, graph: MetricGraph, h) -> Tuple[Fraction, Fraction]:
    """``(osc phi, binned l1)`` where ``Delta phi = mu - nu``."""
    if mu.mass != nu.mass:
        raise ValueError(f"masses differ: {mu.mass} vs {nu.mass}")
    h = as_fraction(h)
    osc = solve_poisson(graph, mu - nu).oscillation()
    return osc, binned_l1(graph, mu, nu, h)


# ---------------------------------------------------------------------------
# the per-edge law


@dataclass
class ConvergenceRow:
    n: int
    edge: str
    lhs: Fraction
    target: Fraction
    t_n: int
    claim_ok: Optional[bool] = None
    ineq_ok: Dict[str, bool] = field(default_factory=dict)
    osc_phi: Optional[Fraction] = None
    l1_binned: Optional[Fraction] = None
    deg_Wn: Optional[Fraction] = None
    mass_err: Optional[Fraction] = None

    def to_json(self) -> dict:
        opt = lambda q: None if q is None else fmt(q)
        return {
            "n": self.n,
            "edge": self.edge,
            "lhs_pr5": fmt(self.lhs),
            "target": fmt(self.target),
            "t_n": self.t_n,
            "claim_ok": self.claim_ok,
            "ineq_ok": dict(sorted(self.ineq_ok.items())),
            "osc_phi": opt(self.osc_phi),
            "l1_binned": opt(self.l1_binned),
            "deg_Wn": opt(self.deg_Wn),
            "mass_err": opt(self.mass_err),
        }


def edge_target(graph: MetricGraph, eid: str) -> Fraction:
    rho = edge_resistance(graph, eid)
    if rho == INFINITY:
        return Fraction(0)
    ln = graph.length(eid)
    return ln / (ln + rho)


def _restricted_atoms(f: PLFunction, eid: str) -> Dict[Point, Fraction]:
    """Atoms of ``Delta f`` on the graph with the open edge ``eid`` removed."""
    out = {}
    for p in f.breakpoints():
        if not p.is_vertex and p.name == eid:
            continue
        s = sum((f.slope(d) for d in f.graph.tangent_directions(p) if d.edge != eid), Fraction(0))
        if s:
            out[p] = -s
    return out


def edge_checks(model, eid, n, d, g, s, wit, reduced):
    """Claim bounds and the four witness inequalities for edge ``eid``."""
    e = model.edge(eid)
    x, y = e.u, e.v
    nu_y = _direction(model, x, eid)  # at x, towards y
    nu_x = _direction(model, y, eid)  # at y, towards x
    t = s[(x, eid)] + s[(y, eid)]
    fn = wit[y] - wit[x]
    sy = fn.slope(nu_x)
    sx = fn.slope(nu_y)
    claim = (t - g <= sy <= t) and (-t <= sx <= -t + g)
    atoms = _restricted_atoms(fn, eid)
    a_y = atoms.pop(Point.vertex(y), Fraction(0))
    a_x = -atoms.pop(Point.vertex(x), Fraction(0))
    nd = n * d
    ineq = {
        "ineq1": nd + t - 3 * g <= a_y <= nd + t,
        "ineq2": nd + t - 3 * g <= a_x <= nd + t,
        "ineq3": all(-g <= a <= g for a in atoms.values()),
        "ineq4": -2 * g <= sum(atoms.values(), Fraction(0)) <= 2 * g,
    }
    return claim, ineq


def pr5_table(graph: MetricGraph, D: Divisor, n_max: int, n_min: int = 1, checks: bool = True) -> List[ConvergenceRow]:
    """Per edge and per ``n``: ``1 + (s^{nu_x} + s^{nu_y}) / (nd)`` against
    ``len / (len + rho)``."""
    rows, _ = _run_coarse(graph, D, n_min, n_max, checks)
    return rows


def _run_coarse(graph, D, n_min, n_max, checks=True, keep_at=()):
    ref = model_for(graph, D)
    model = ref.graph
    Dm = Divisor((ref.to_new(p), c) for p, c in D.items())
    d = Dm.degree
    _, g = genus(graph)
    fam = ReducedFamily(model, Dm)
    targets = {e.id: edge_target(model, e.id) for e in model.edges}
    rows, snapshots = [], {}
    consistency = True
    slopes_by_arc: Dict[Tuple[str, str], Dict[int, Tuple[int, int]]] = {}
    rc = RankComputer(model)
    for n in range(1, n_max + 1):
        reduced = fam.advance()
        if n < n_min and n not in keep_at:
            continue
        r = series_rank(model, Dm, n, rc)
        data, wit = slope_data_from_reductions(model, Dm, n, r, reduced)
        s = {}
        for x, vs in data.vertices.items():
            total = 0
            for key, (s0,) in vs.directions.items():
                s[(x, key.edge)] = s0
                total += s0
                slopes_by_arc.setdefault((x, key.edge), {})[n] = (s0, reduced[x].coefficient(Point.vertex(x)))
            cx = n * Dm.coefficient(Point.vertex(x)) - total
            if cx != reduced[x].coefficient(Point.vertex(x)) or not (n * d - g <= cx <= n * d):
                consistency = False
        if n in keep_at:
            snapshots[n] = (reduced, r)
        if n < n_min:
            continue
        W = midpoint_weierstrass(data)
        deg = Fraction(W.degree)
        mass_err = abs(deg / (g * (r + 1) ** 2) - 1)
        for e in model.edges:
            t = s[(e.u, e.id)] + s[(e.v, e.id)]
            row = ConvergenceRow(n, e.id, 1 + Fraction(t, n * d), targets[e.id], t, deg_Wn=deg, mass_err=mass_err)
            if checks:
                row.claim_ok, row.ineq_ok = edge_checks(model, e.id, n, d, g, s, wit, reduced)
            rows.append(row)
    extra = {
        "model": ref,
        "D": Dm,
        "g": g,
        "d": d,
        "consistency": consistency,
        "slopes_by_arc": slopes_by_arc,
        "snapshots": snapshots,
    }
    return rows, extra


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    graph: MetricGraph
    divisor: Divisor
    n_max: int
    n_min: int = 1
    mode: str = "tropical-surrogate"
    slope_files: Dict[int, SlopeData] = field(default_factory=dict)
    h: Fraction = Fraction(1, 4)
    mesh: Fraction = Fraction(1, 32)
    measure_ns: Tuple[int, ...] = ()
    osc_ratio: Fraction = Fraction(5)
    l1_max: Fraction = Fraction(1, 10)
    pr5_factor: Fraction = Fraction(3)
    pr5_slack: Fraction = Fraction(0)
    label: str = "experiment"

    def __post_init__(self):
        if self.divisor.degree < 1:
            raise ValueError("the divisor must have positive degree")
        if self.n_max < self.n_min or self.n_min < 1:
            raise ValueError("empty n range")
        if self.mode not in ("tropical-surrogate", "explicit"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "explicit":
            missing = [n for n in range(self.n_min, self.n_max + 1) if n not in self.slope_files]
            if missing:
                raise ValueError(f"explicit mode needs slope data for n = {missing}")
        self.h = as_fraction(self.h)
        self.mesh = as_fraction(self.mesh)
        if not self.measure_ns:
            self.measure_ns = (self.n_max,)
        self.measure_ns = tuple(sorted(set(int(n) for n in self.measure_ns)))

    @classmethod
    def from_json(cls, data: dict, base_dir: str = ".") -> "ExperimentConfig":
        import os

        from .jsonio import load_divisor, load_graph, load_slope_data

        def path(p):
            return p if os.path.isabs(p) else os.path.join(base_dir, p)

        graph = load_graph(path(data["graph"]))
        D = load_divisor(path(data["divisor"]), graph)
        slope_files = {int(n): load_slope_data(path(p)) for n, p in data.get("slope_files", {}).items()}
        kw = {}
        for key in ("n_min", "mode", "label"):
            if key in data:
                kw[key] = data[key]
        for key in ("h", "mesh", "osc_ratio", "l1_max", "pr5_factor", "pr5_slack"):
            if key in data:
                kw[key] = as_fraction(data[key])
        if "measure_ns" in data:
            kw["measure_ns"] = tuple(data["measure_ns"])
        return cls(graph, D, int(data["n_max"]), slope_files=slope_files, **kw)


def _measure_stats(graph, D, n, reduced_coarse, r, mesh, h, mu_ad, g):
    ref = model_for(graph, D)
    Dm = Divisor((ref.to_new(p), c) for p, c in D.items())
    mesh_ref = subdivide(ref.graph, mesh)
    # map mesh refinement back to the original graph in one step
    red = mesh_reductions(mesh_ref, Dm, n, reduced_coarse)
    data = mesh_slope_data(mesh_ref, Dm, n, r, red)
    mu_model = mu_n(data, g, ref.graph, mesh_ref)
    mu = Measure(graph, {ref.to_old(p): m for p, m in mu_model.atoms.items()})
    osc, l1 = compare_measures(mu, mu_ad, graph, h)
    return mu, osc, l1


def run_experiment(cfg: ExperimentConfig) -> dict:
    graph, D = cfg.graph, cfg.divisor
    _, g = genus(graph)
    mu_ad = zhang_measure(graph)
    verdicts = {}
    if cfg.mode == "explicit":
        return _run_explicit(cfg, mu_ad, g)
    rows, extra = _run_coarse(graph, D, cfg.n_min, cfg.n_max, keep_at=cfg.measure_ns)
    model = extra["model"].graph
    snapshots = {}
    for n in cfg.measure_ns:
        reduced, r = extra["snapshots"][n]
        mu, osc, l1 = _measure_stats(graph, D, n, reduced, r, cfg.mesh, cfg.h, mu_ad, g)
        snapshots[n] = {"osc_phi": osc, "l1_binned": l1, "measure": mu}
        for row in rows:
            if row.n == n:
                row.osc_phi, row.l1_binned = osc, l1
    # verdicts
    d = extra["d"]
    verdicts["surrogate_consistency"] = extra["consistency"]
    pr5_ok = True
    for row in rows:
        bound = cfg.pr5_factor * g / (row.n) + cfg.pr5_slack
        if abs(row.lhs - row.target) > bound:
            pr5_ok = False
    verdicts["pr5_bound"] = pr5_ok
    bounded_findings = []
    last = [row for row in rows if row.n > cfg.n_max // 2]
    for e in model.edges:
        es = [row for row in last if row.edge == e.id]
        if es and all(abs(row.n * d + row.t_n) <= 3 * g + 1 for row in es):
            if edge_resistance(model, e.id) != INFINITY:
                bounded_findings.append(e.id)
    verdicts["bounded_case_only_on_bridges"] = not bounded_findings
    verdicts["mass_exact"] = all(row.mass_err == 0 for row in rows if row.n * d >= 2 * g - 1)
    if len(cfg.measure_ns) >= 2:
        lo, hi = cfg.measure_ns[0], cfg.measure_ns[-1]
        o_lo, o_hi = snapshots[lo]["osc_phi"], snapshots[hi]["osc_phi"]
        verdicts["oscillation_trend"] = o_hi * cfg.osc_ratio <= o_lo
    verdicts["l1_final"] = snapshots[cfg.measure_ns[-1]]["l1_binned"] < cfg.l1_max
    okounkov = _okounkov_stats(extra, g, cfg.n_max)
    verdicts["okounkov_width"] = all(item["width_ok"] for item in okounkov.values())
    report = {
        "label": cfg.label,
        "mode": cfg.mode,
        "note": SURROGATE_NOTE,
        "graph": graph.to_json(),
        "divisor": divisor_to_json(D),
        "genus": g,
        "degree": d,
        "n_range": [cfg.n_min, cfg.n_max],
        "h": fmt(cfg.h),
        "mesh": fmt(cfg.mesh),
        "mu_ad": mu_ad.to_json(),
        "rows": [row.to_json() for row in rows],
        "measures": {
            str(n): {
                "osc_phi": fmt(v["osc_phi"]),
                "l1_binned": fmt(v["l1_binned"]),
                "mu_n": v["measure"].to_json(),
            }
            for n, v in snapshots.items()
        },
        "okounkov": okounkov,
        "bounded_case_edges_not_bridges": bounded_findings,
        "verdicts": verdicts,
    }
    return report


def _okounkov_stats(extra, g, n_max):
    out = {}
    for (x, eid), by_n in sorted(extra["slopes_by_arc"].items()):
        lists = {n: list(range(s0, s0 + cx + 1)) for n, (s0, cx) in by_n.items()}
        fam = SlopeFamily(extra["d"], g, lists)
        item = {}
        N = max(lists)
        item["width_defect"] = fmt(width_defect(fam, N))
        item["width_ok"] = all(abs(width_defect(fam, n)) <= Fraction(2 * g, n) for n in lists)
        item["sminmax_gap"] = fmt(sminmax_gap(fam, N))
        try:
            rep = fekete_limits(fam) if fam.ns == list(range(1, N + 1)) else None
        except FeketeViolation as exc:
            item["fekete"] = {"violation": str(exc)}
            rep = None
        if rep is not None:
            item["fekete"] = {
                "s_min_estimate": fmt(rep.s_min_estimate),
                "s_min_bracket": [fmt(q) for q in rep.s_min_bracket],
                "s_max_bracket": [fmt(q) for q in rep.s_max_bracket],
            }
            item["ks_last"] = fmt(ks_uniformity(fam, N, rep.s_min_estimate))
        out[f"{x}:{eid}"] = item
    return out


def _run_explicit(cfg, mu_ad, g):
    graph = cfg.graph
    rows = []
    ok_mass = True
    for n in range(cfg.n_min, cfg.n_max + 1):
        data = cfg.slope_files[n]
        W = weierstrass_divisor(data)
        deg = Fraction(W.degree)
        norm = g * (data.r + 1) ** 2
        err = abs(deg / norm - 1)
        ok_mass = ok_mass and (err == 0 if data.mode == "full" else True)
        mu = mu_n(data, g, graph, strict=False)
        osc, l1 = compare_measures(mu * (1 / mu.mass), mu_ad, graph, cfg.h) if mu.mass else (None, None)
        rows.append(
            {
                "n": n,
                "deg_Wn": fmt(deg),
                "expected_degree": norm,
                "mass_err": fmt(err),
                "osc_phi": None if osc is None else fmt(osc),
                "l1_binned": None if l1 is None else fmt(l1),
            }
        )
    return {
        "label": cfg.label,
        "mode": cfg.mode,
        "graph": graph.to_json(),
        "divisor": divisor_to_json(cfg.divisor),
        "genus": g,
        "rows": rows,
        "verdicts": {"weierstrass_degree": ok_mass},
    }


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


CSV_COLUMNS = ["n", "edge", "lhs_pr5", "target", "osc_phi", "l1_binned", "deg_Wn", "mass_err"]


def report_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report["rows"]:
        w.writerow(["" if row.get(c) is None else row.get(c) for c in CSV_COLUMNS])
    return buf.getvalue()
