import random
from fractions import Fraction

import networkx as nx
import pytest
import sympy
from hypothesis import strategies as st

from tropweier.graph import MetricGraph


def random_simple_graph(rng: random.Random, max_vertices: int = 8, max_den: int = 4) -> MetricGraph:
    """Connected simple graph with random rational lengths."""
    n = rng.randint(2, max_vertices)
    names = [f"v{i}" for i in range(n)]
    edges = set()
    for i in range(1, n):
        edges.add((rng.randrange(i), i))
    extra = rng.randint(0, n)
    for _ in range(extra):
        a, b = rng.sample(range(n), 2)
        edges.add((min(a, b), max(a, b)))
    out = []
    for k, (a, b) in enumerate(sorted(edges)):
        ln = Fraction(rng.randint(1, 3 * max_den), rng.randint(1, max_den))
        out.append((f"e{k}", names[a], names[b], ln))
    return MetricGraph(names, out)


@st.composite
def simple_graphs(draw, max_vertices=6, max_den=3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_simple_graph(random.Random(seed), max_vertices, max_den)


def nx_graph(G: MetricGraph) -> nx.MultiGraph:
    H = nx.MultiGraph()
    H.add_nodes_from(G.vertices)
    for e in G.edges:
        H.add_edge(e.u, e.v, key=e.id, length=e.length)
    return H


def sympy_resistance(G: MetricGraph, a: str, b: str) -> Fraction:
    """Exact effective resistance from the grounded weighted Laplacian."""
    vs = list(G.vertices)
    idx = {v: i for i, v in enumerate(vs)}
    n = len(vs)
    L = sympy.zeros(n, n)
    for e in G.edges:
        w = sympy.Rational(e.length.denominator, e.length.numerator)
        i, j = idx[e.u], idx[e.v]
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    if a == b:
        return Fraction(0)
    keep = [i for i in range(n) if i != idx[b]]
    M = L.extract(keep, keep)
    rhs = sympy.zeros(n - 1, 1)
    rhs[keep.index(idx[a])] = 1
    x = M.LUsolve(rhs)
    val = x[keep.index(idx[a])]
    return Fraction(int(val.p), int(val.q))


@pytest.fixture
def rng():
    return random.Random(20261018)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
