"""Brute-force chip firing on a finite graph, used as an independent oracle.

By the comparison theorem for unit-length subdivisions, the rank of a
vertex-supported divisor on a metric graph with integer edge lengths equals its
rank on the graph obtained by cutting every edge into unit pieces.
"""

import itertools

import networkx as nx


def unit_subdivision(G):
    H = nx.MultiGraph()
    H.add_nodes_from(G.vertices)
    for e in G.edges:
        assert e.length.denominator == 1
        k = int(e.length)
        names = [e.u] + [f"{e.id}#{i}" for i in range(1, k)] + [e.v]
        for a, b in zip(names, names[1:]):
            H.add_edge(a, b)
    return H


def _effective_away(H, D, q):
    """Greedy borrowing by vertices in debt; ``q`` never borrows so this
    terminates."""
    D = dict(D)
    while True:
        bad = [v for v in H if v != q and D.get(v, 0) < 0]
        if not bad:
            return D
        v = bad[0]
        for w in H.neighbors(v):
            D[w] = D.get(w, 0) - 1
            D[v] = D.get(v, 0) + 1


def reduce_finite(H, D, q):
    D = _effective_away(H, D, q)
    while True:
        burnt = {q}
        changed = True
        while changed:
            changed = False
            for v in H:
                if v in burnt:
                    continue
                hits = sum(1 for w in H.neighbors(v) if w in burnt)
                if hits > D.get(v, 0):
                    burnt.add(v)
                    changed = True
        if len(burnt) == len(H):
            return D
        for a, b in H.edges():
            if (a in burnt) != (b in burnt):
                src, dst = (b, a) if a in burnt else (a, b)
                D[src] = D.get(src, 0) - 1
                D[dst] = D.get(dst, 0) + 1


def is_equivalent_to_effective(H, D):
    q = next(iter(H))
    return reduce_finite(H, D, q).get(q, 0) >= 0


def finite_rank(H, D):
    if sum(D.values()) < 0 or not is_equivalent_to_effective(H, D):
        return -1
    nodes = list(H)
    k = 0
    while True:
        k += 1
        for E in itertools.combinations_with_replacement(nodes, k):
            DE = dict(D)
            for v in E:
                DE[v] = DE.get(v, 0) - 1
            if not is_equivalent_to_effective(H, DE):
                return k - 1
