"""JSON readers and writers for the package's exchange formats."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Union

from .functions import Measure
from .graph import Divisor, GraphError, MetricGraph, Point
from .okounkov import SlopeFamily
from .rational import as_fraction, fmt
from .slopes import SlopeStructure
from .weierstrass import SlopeData


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def graph_from_json(data: dict) -> MetricGraph:
    verts = {}
    for item in data["vertices"]:
        if isinstance(item, str):
            verts[item] = 0
        else:
            verts[str(item["id"])] = int(item.get("genus", 0))
    edges = []
    for i, e in enumerate(data.get("edges", [])):
        eid = e.get("id", f"e{i}")
        edges.append((eid, e["u"], e["v"], as_fraction(e["length"])))
    return MetricGraph(verts, edges)


def point_from_json(graph: MetricGraph, item: Union[dict, str]) -> Point:
    if isinstance(item, str):
        return graph.parse_point(item)
    if "vertex" in item:
        return graph.point(item["vertex"])
    if "edge" in item:
        return graph.point(item["edge"], item["offset"])
    raise GraphError(f"cannot parse point {item!r}")


def divisor_from_json(graph: MetricGraph, data: dict) -> Divisor:
    coeffs = {}
    for item in data["coeffs"]:
        p = point_from_json(graph, item["point"])
        c = as_fraction(item["c"])
        coeffs[p] = coeffs.get(p, 0) + (int(c) if c.denominator == 1 else c)
    return Divisor(coeffs)


def divisor_to_json(D: Divisor) -> dict:
    return {"coeffs": [{"point": p.to_json(), "c": fmt(Fraction(c))} for p, c in sorted(D.items())]}


def measure_from_json(graph: MetricGraph, data: dict) -> Measure:
    atoms = {}
    for item in data.get("atoms", []):
        p = point_from_json(graph, item["point"])
        atoms[p] = atoms.get(p, Fraction(0)) + as_fraction(item["mass"])
    dens = [(d["edge"], d["from"], d["to"], d["density"]) for d in data.get("densities", [])]
    return Measure(graph, atoms, dens)


def load_graph(path: str) -> MetricGraph:
    return graph_from_json(read_json(path))


def load_divisor(path: str, graph: MetricGraph) -> Divisor:
    return divisor_from_json(graph, read_json(path))


def load_measure(path: str, graph: MetricGraph) -> Measure:
    return measure_from_json(graph, read_json(path))


def load_slope_structure(path: str, graph: MetricGraph) -> SlopeStructure:
    return SlopeStructure.from_json(graph, read_json(path))


def load_slope_data(path: str) -> SlopeData:
    return SlopeData.from_json(read_json(path))


def load_slope_family(path: str) -> SlopeFamily:
    return SlopeFamily.from_json(read_json(path))
