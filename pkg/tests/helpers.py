"""Random instances and brute-force reference solvers for the tests."""

import itertools
import math

import networkx as nx
import numpy as np

from steinapprox import Instance


def random_instance(rng, n=None, r=None, extra=None, integer=True, zero=0.0, max_cost=10):
    """Connected random graph: a random spanning tree plus extra edges."""
    n = int(rng.integers(3, 11)) if n is None else n
    r = int(rng.integers(2, n + 1)) if r is None else min(r, n)
    extra = int(rng.integers(0, n + 1)) if extra is None else extra
    perm = rng.permutation(n)
    edges = []

    def cost():
        if zero and rng.random() < zero:
            return 0.0
        return float(rng.integers(1, max_cost + 1)) if integer else float(rng.uniform(0.5, max_cost))

    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((int(perm[i]), int(perm[j]), cost()))
    for _ in range(extra):
        u, v = rng.choice(n, 2, replace=False)
        edges.append((int(u), int(v), cost()))
    terms = rng.choice(n, r, replace=False)
    return Instance.build(n, edges, [int(t) for t in terms])


def brute_force_steiner(inst):
    """Cheapest connected subgraph MST over all node sets containing R."""
    g = nx.Graph()
    for u, v, c in inst.edges:
        g.add_edge(u, v, weight=c)
    others = inst.nonterminals
    best = math.inf
    for s in range(len(others) + 1):
        for extra in itertools.combinations(others, s):
            h = g.subgraph(list(inst.terminals) + list(extra))
            if nx.is_connected(h):
                t = nx.minimum_spanning_tree(h)
                best = min(best, t.size(weight="weight"))
    return best


def brute_force_min_cut(arcs, source, sinks):
    nodes = sorted({a for a, _, _ in arcs} | {b for _, b, _ in arcs} | {source} | set(sinks), key=str)
    free = [v for v in nodes if v != source and v not in sinks]
    best = math.inf
    for mask in range(1 << len(free)):
        side = {source} | {free[i] for i in range(len(free)) if mask >> i & 1}
        cut = sum(c for a, b, c in arcs if a in side and b not in side)
        best = min(best, cut)
    return best


def definitional_save(tree_cost_fn, edges, r, terms):
    """MST cost drop after joining ``terms`` with zero-cost edges."""
    before = tree_cost_fn(r, edges)
    zeros = [(terms[0], t, 0.0) for t in terms[1:]]
    return before - tree_cost_fn(r, edges + zeros)


def mst_cost(r, edges):
    g = nx.Graph()
    g.add_nodes_from(range(r))
    for a, b, c in edges:
        if g.has_edge(a, b):
            g[a][b]["weight"] = min(g[a][b]["weight"], c)
        else:
            g.add_edge(a, b, weight=c)
    return nx.minimum_spanning_tree(g).size(weight="weight")


def star():
    """Center 0 joined to terminals 1, 2, 3 at unit cost."""
    return Instance.build(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)], [1, 2, 3], name="star")


def cycle_spokes():
    """Zero-cost 4-cycle on nonterminals 4..7, terminal i hangs off 4+i."""
    edges = [(4 + i, 4 + (i + 1) % 4, 0) for i in range(4)]
    edges += [(i, 4 + i, 1) for i in range(4)]
    return Instance.build(8, edges, [0, 1, 2, 3], name="cycle_spokes")


def path3():
    return Instance.build(3, [(0, 1, 1), (1, 2, 1)], [0, 2], name="path3")


def voronoi_gap(eps=0.25):
    """Terminals 0..4, nonterminals 5 (owned by 0) and 6 (owned by 1).

    The cheapest 4-restricted tree (8 + 4 eps) uses a component on
    {1, 2, 3, 4} through node 5, which lies in terminal 0's region; with
    Voronoi-restricted components the best is 9 + 3 eps.
    """
    edges = [
        (0, 5, 2.0),
        (5, 2, 2.0 + eps),
        (5, 3, 2.0 + eps),
        (5, 6, 1.0 + eps),
        (1, 6, 1.0),
        (6, 4, 1.0 + eps),
        (0, 4, 1.0),
    ]
    return Instance.build(7, edges, [0, 1, 2, 3, 4], name=f"voronoi_gap_{eps:g}")
