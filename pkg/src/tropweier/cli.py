"""Command-line entry point: ``tropweier <subcommand> ...``."""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import jsonio
from .divisors import RankComputer, reduce
from .equidist import ExperimentConfig, report_csv, report_json, run_experiment
from .graph import GraphError, canonical_divisor, genus, validate
from .okounkov import FeketeViolation, fekete_limits, ks_uniformity, sminmax_gap, w1_uniformity, width_defect
from .potential import INFINITY, ResistanceTable, green, green_function, zhang_measure
from .rational import fmt
from .slopes import grd_failures
from .weierstrass import midpoint_weierstrass, reduce_weierstrass


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _graph(args):
    if not args.graph:
        raise SystemExit("--graph is required")
    return jsonio.load_graph(args.graph)


def _divisor(args, graph):
    if not args.divisor:
        raise SystemExit("--divisor is required")
    return jsonio.load_divisor(args.divisor, graph)


def _grid(args, graph):
    if not args.grid:
        return None
    return [graph.parse_point(t) for t in args.grid.split(",") if t.strip()]


def _fmt_r(q):
    return "inf" if q == INFINITY else fmt(q)


def cmd_validate(args):
    G = _graph(args)
    validate(G, simple=args.simple)
    b1, g = genus(G)
    _emit(args, jsonio.dumps({"valid": True, "betti": b1, "genus": g}))


def cmd_canonical(args):
    G = _graph(args)
    K = canonical_divisor(G)
    out = jsonio.divisor_to_json(K)
    out["degree"] = K.degree
    _emit(args, jsonio.dumps(out))


def cmd_zhang(args):
    _emit(args, jsonio.dumps(zhang_measure(_graph(args)).to_json()))


def cmd_resistance(args):
    G = _graph(args)
    pts = _grid(args, G) or [G.point(v) for v in G.vertices]
    table = ResistanceTable(G, pts)
    rows = [{"a": str(p), "b": str(q), "r": _fmt_r(table(p, q))} for p in pts for q in pts if p < q]
    if args.format == "csv":
        _emit(args, "a,b,r\n" + "".join(f"{r['a']},{r['b']},{r['r']}\n" for r in rows))
    else:
        _emit(args, jsonio.dumps(rows))


def cmd_green(args):
    G = _graph(args)
    z, x = G.parse_point(args.z), G.parse_point(args.x)
    if args.y:
        out = {"value": fmt(green(G, z, x, G.parse_point(args.y)))}
    else:
        out = {"function": green_function(G, z, x).to_json()}
    _emit(args, jsonio.dumps(out))


def cmd_reduce(args):
    G = _graph(args)
    D = _divisor(args, G)
    Dv, f = reduce(G, D, G.parse_point(args.at))
    out = {"reduced": jsonio.divisor_to_json(Dv), "witness": f.to_json()}
    _emit(args, jsonio.dumps(out))


def cmd_rank(args):
    G = _graph(args)
    D = _divisor(args, G)
    _emit(args, jsonio.dumps({"rank": RankComputer(G, _grid(args, G)).rank(D)}))


def cmd_grd_check(args):
    G = _graph(args)
    D = _divisor(args, G)
    if not args.slopes:
        raise SystemExit("--slopes is required")
    S = jsonio.load_slope_structure(args.slopes, G)
    bad = grd_failures(G, D, S, _grid(args, G))
    out = {"grd": not bad, "failures": [jsonio.divisor_to_json(E) for E in bad]}
    _emit(args, jsonio.dumps(out))
    return 0 if not bad else 1


def cmd_weierstrass(args):
    if not args.slopes:
        raise SystemExit("--slopes is required")
    data = jsonio.load_slope_data(args.slopes)
    mode = args.mode or ("full" if data.mode == "full" else "surrogate")
    W = reduce_weierstrass(data) if mode == "full" else midpoint_weierstrass(data)
    out = jsonio.divisor_to_json(W)
    out.update({"mode": mode, "degree": fmt(Fraction(W.degree)), "r": data.r, "n": data.n})
    _emit(args, jsonio.dumps(out))


def cmd_okounkov(args):
    if not args.slopes:
        raise SystemExit("--slopes is required")
    fam = jsonio.load_slope_family(args.slopes)
    out = {"d": fam.d, "g": fam.g}
    try:
        rep = fekete_limits(fam)
        out["fekete"] = {
            "N": rep.N,
            "pairs_checked": rep.pairs_checked,
            "s_min_estimate": fmt(rep.s_min_estimate),
            "s_max_estimate": fmt(rep.s_max_estimate),
            "s_min_bracket": [fmt(q) for q in rep.s_min_bracket],
            "s_max_bracket": [fmt(q) for q in rep.s_max_bracket],
        }
        a = rep.s_min_estimate
    except (FeketeViolation, ValueError) as exc:
        out["fekete"] = {"error": str(exc)}
        a = None
    ns = [n for n in fam.ns if args.n_max is None or n <= args.n_max]
    rows = []
    for n in ns:
        row = {"n": n, "width_defect": fmt(width_defect(fam, n)), "sminmax_gap": fmt(sminmax_gap(fam, n))}
        if a is not None:
            row["ks"] = fmt(ks_uniformity(fam, n, a))
            row["w1"] = fmt(w1_uniformity(fam, n, a))
        rows.append(row)
    out["rows"] = rows
    _emit(args, jsonio.dumps(out))


def cmd_equidist(args):
    if args.config:
        data = jsonio.read_json(args.config)
        cfg = ExperimentConfig.from_json(data, os.path.dirname(os.path.abspath(args.config)))
    else:
        G = _graph(args)
        D = _divisor(args, G)
        if args.n_max is None:
            raise SystemExit("--n-max is required without --config")
        kw = {}
        if args.mode:
            kw["mode"] = args.mode
        if args.measure_ns:
            kw["measure_ns"] = tuple(int(t) for t in args.measure_ns.split(","))
        if args.mesh:
            kw["mesh"] = Fraction(args.mesh)
        if args.h:
            kw["h"] = Fraction(args.h)
        cfg = ExperimentConfig(G, D, args.n_max, **kw)
    report = run_experiment(cfg)
    _emit(args, report_csv(report) if args.format == "csv" else report_json(report))
    for name, ok in sorted(report["verdicts"].items()):
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return 0 if all(report["verdicts"].values()) else 1


COMMANDS = {
    "validate": cmd_validate,
    "canonical": cmd_canonical,
    "zhang": cmd_zhang,
    "resistance": cmd_resistance,
    "green": cmd_green,
    "reduce": cmd_reduce,
    "rank": cmd_rank,
    "grd-check": cmd_grd_check,
    "weierstrass": cmd_weierstrass,
    "okounkov": cmd_okounkov,
    "equidist": cmd_equidist,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tropweier", description="Exact computations on augmented metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--graph")
        s.add_argument("--divisor")
        s.add_argument("--slopes")
        s.add_argument("--n-max", type=int)
        s.add_argument("--mode")
        s.add_argument("--grid", help="comma separated points, e.g. x,e1@1/2")
        s.add_argument("--out")
        s.add_argument("--format", choices=("csv", "json"), default="json")
    sub.choices["validate"].add_argument("--simple", action="store_true", help="reject parallel edges")
    sub.choices["green"].add_argument("--z", required=True)
    sub.choices["green"].add_argument("--x", required=True)
    sub.choices["green"].add_argument("--y")
    sub.choices["reduce"].add_argument("--at", required=True)
    eq = sub.choices["equidist"]
    eq.add_argument("--config")
    eq.add_argument("--measure-ns", help="comma separated n values for measure snapshots")
    eq.add_argument("--mesh")
    eq.add_argument("--h")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = COMMANDS[args.command](args)
    except (GraphError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
