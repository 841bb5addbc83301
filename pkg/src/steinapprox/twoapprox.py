"""Classic 2-approximations: Takahashi-Matsuyama, Kou-Markowsky-Berman
and Mehlhorn's Voronoi variant, plus the common cleanup step."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .budget import Deadline
from .graph import (
    DistanceOracle,
    Instance,
    UnionFind,
    edge_key,
    metric_closure,
    mst,
    shortest_paths,
    voronoi_regions,
)

__all__ = ["SteinerTree", "tm", "kmb", "mehlhorn", "prune_to_steiner_tree", "path_edges"]


@dataclass(frozen=True)
class SteinerTree:
    """Edge subset of an instance graph forming a terminal-spanning tree."""

    edges: frozenset[tuple[int, int]]
    cost: float

    @classmethod
    def from_edges(cls, inst: Instance, edges: Iterable[tuple[int, int]]) -> "SteinerTree":
        keys = frozenset(edge_key(u, v) for u, v in edges)
        return cls(keys, float(sum(inst.cost[e] for e in keys)))

    @property
    def nodes(self) -> set[int]:
        out = set()
        for u, v in self.edges:
            out.add(u)
            out.add(v)
        return out

    def check(self, inst: Instance, terminals: Sequence[int] | None = None) -> None:
        """Raise ``AssertionError`` unless this is a pruned Steiner tree."""
        terms = set(inst.terminals if terminals is None else terminals)
        nodes = self.nodes or {next(iter(terms))}
        assert all(e in inst.cost for e in self.edges), "edge not in graph"
        assert terms <= nodes, "tree misses a terminal"
        assert len(self.edges) == len(nodes) - 1, "edge count is not |V_T| - 1"
        uf = UnionFind(inst.n)
        for u, v in self.edges:
            assert uf.union(u, v), "cycle"
        deg: dict[int, int] = {}
        for u, v in self.edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        assert all(d > 1 or x in terms for x, d in deg.items()), "nonterminal leaf"
        assert math.isclose(self.cost, sum(inst.cost[e] for e in self.edges), rel_tol=1e-9, abs_tol=1e-9)


def path_edges(path: Sequence[int]) -> list[tuple[int, int]]:
    return [edge_key(a, b) for a, b in zip(path, path[1:])]


def prune_to_steiner_tree(
    inst: Instance, edges: Iterable[tuple[int, int]], terminals: Sequence[int] | None = None
) -> SteinerTree:
    """MST of the subgraph, restricted to the part holding the terminals,
    with nonterminal leaves stripped repeatedly."""
    terms = list(inst.terminals if terminals is None else terminals)
    keys = sorted(set(edge_key(u, v) for u, v in edges))
    if not keys:
        if len(set(terms)) <= 1:
            return SteinerTree(frozenset(), 0.0)
        raise ValueError("subgraph does not connect the terminals")
    order = sorted(range(len(keys)), key=lambda i: (inst.cost[keys[i]], i))
    uf = UnionFind(inst.n)
    forest = [keys[i] for i in order if uf.union(*keys[i])]
    root = uf.find(terms[0])
    if any(uf.find(t) != root for t in terms):
        raise ValueError("subgraph does not connect the terminals")
    forest = [e for e in forest if uf.find(e[0]) == root]

    tset = set(terms)
    adj: dict[int, set[int]] = {}
    for u, v in forest:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    leaves = [x for x, nb in adj.items() if len(nb) == 1 and x not in tset]
    while leaves:
        x = leaves.pop()
        if x not in adj or len(adj[x]) != 1:
            continue
        (y,) = adj.pop(x)
        adj[y].discard(x)
        if not adj[y]:
            del adj[y]
        elif len(adj[y]) == 1 and y not in tset:
            leaves.append(y)
    kept = {edge_key(u, v) for u, nb in adj.items() for v in nb}
    return SteinerTree.from_edges(inst, kept)


def _nearest_from(inst: Instance, sources: set[int], targets: set[int]):
    """Multi-source Dijkstra; returns (target, path from the tree)."""
    dist = {s: 0.0 for s in sources}
    pred = {s: s for s in sources}
    heap = [(0.0, s) for s in sorted(sources)]
    heapq.heapify(heap)
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x in targets:
            seq = [x]
            while pred[seq[-1]] != seq[-1]:
                seq.append(pred[seq[-1]])
            return x, seq[::-1]
        for y, c in inst.adjacency[x]:
            nd = d + c
            if y not in done and nd < dist.get(y, math.inf):
                dist[y] = nd
                pred[y] = x
                heapq.heappush(heap, (nd, y))
    raise ValueError("terminals unreachable")


def tm(
    inst: Instance,
    terminals: Sequence[int] | None = None,
    start: int | None = None,
    best_of_all: bool = False,
    deadline: Deadline | None = None,
) -> SteinerTree:
    """Takahashi-Matsuyama shortest-path heuristic.

    Grows a tree from ``start`` (default: the lowest terminal), adding the
    shortest path to the nearest unreached terminal in each round. Ties
    between equally near terminals go to the lowest node id. With
    ``best_of_all`` every terminal is tried as a start.
    """
    terms = sorted(set(inst.terminals if terminals is None else terminals))
    if best_of_all:
        trees = [tm(inst, terms, start=s, deadline=deadline) for s in terms]
        return min(trees, key=lambda t: t.cost)
    start = terms[0] if start is None else start
    tree_nodes = {start}
    remaining = set(terms) - tree_nodes
    edges: set[tuple[int, int]] = set()
    while remaining:
        if deadline is not None:
            deadline.check()
        t, path = _nearest_from(inst, tree_nodes, remaining)
        edges.update(path_edges(path))
        tree_nodes.update(path)
        remaining -= tree_nodes
    return prune_to_steiner_tree(inst, edges, terms)


def kmb(inst: Instance, oracle: DistanceOracle | None = None) -> SteinerTree:
    """Kou-Markowsky-Berman: MST of the terminal distance graph, expanded
    to shortest paths, then MST and leaf pruning."""
    if oracle is None:
        oracle = shortest_paths(inst, "sssp", "prefer")
    if oracle.policy != "prefer":
        raise ValueError("kmb needs plain shortest paths (policy 'prefer')")
    terms = list(inst.terminals)
    closure = mst(terms, metric_closure(oracle, terms))
    edges: set[tuple[int, int]] = set()
    for u, v, _ in closure.edges:
        edges.update(path_edges(oracle.path(u, v)))
    return prune_to_steiner_tree(inst, edges)


def mehlhorn(inst: Instance) -> SteinerTree:
    """Mehlhorn's variant: the terminal graph is built from Voronoi
    boundary edges instead of all terminal pairs."""
    vor = voronoi_regions(inst)
    owner, dist = vor.owner, vor.dist
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for idx, (u, v, c) in enumerate(inst.edges):
        a, b = int(owner[u]), int(owner[v])
        if a == b:
            continue
        key = edge_key(a, b)
        w = float(dist[u] + c + dist[v])
        if key not in best or (w, idx) < best[key]:
            best[key] = (w, idx)
    tedges = [(a, b, w) for (a, b), (w, _) in sorted(best.items())]
    closure = mst(inst.terminals, tedges)
    edges: set[tuple[int, int]] = set()
    for a, b, _ in closure.edges:
        u, v, _ = inst.edges[best[edge_key(a, b)][1]]
        edges.add(edge_key(u, v))
        edges.update(path_edges(vor.path_to_owner(u)))
        edges.update(path_edges(vor.path_to_owner(v)))
    return prune_to_steiner_tree(inst, edges)
