"""Graph substrate: instances, shortest paths with terminal policies,
metric closure, minimum spanning trees, Voronoi regions and max-flow.

Nodes are integers ``0..n-1``. Edges are stored once with ``u < v``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

__all__ = [
    "Instance",
    "DistanceOracle",
    "VoronoiPartition",
    "Tree",
    "UnionFind",
    "shortest_paths",
    "metric_closure",
    "mst",
    "voronoi_regions",
    "max_flow",
    "edge_key",
]

INF = math.inf


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, n: int = 0):
        self.parent = list(range(n))
        self.size = [1] * n

    def add(self) -> int:
        self.parent.append(len(self.parent))
        self.size.append(1)
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass(frozen=True)
class Instance:
    """Undirected Steiner tree instance.

    Use :meth:`build` to construct from raw data; it collapses parallel
    edges to their minimum cost and validates the instance.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    terminals: tuple[int, ...]
    name: str = ""

    @classmethod
    def build(
        cls,
        n: int,
        edges: Iterable[Sequence],
        terminals: Iterable[int],
        name: str = "",
    ) -> "Instance":
        best: dict[tuple[int, int], float] = {}
        for u, v, c in edges:
            u, v, c = int(u), int(v), float(c)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not c >= 0 or math.isinf(c):
                raise ValueError(f"edge ({u}, {v}) has invalid cost {c}")
            key = edge_key(u, v)
            if key not in best or c < best[key]:
                best[key] = c
        terms = sorted(set(int(t) for t in terminals))
        if len(terms) < 2:
            raise ValueError("an instance needs at least two terminals")
        for t in terms:
            if not 0 <= t < n:
                raise ValueError(f"terminal {t} outside 0..{n - 1}")
        inst = cls(n, tuple((u, v, c) for (u, v), c in sorted(best.items())), tuple(terms), name)
        if not inst.is_connected():
            raise ValueError("instance graph is not connected")
        return inst

    @cached_property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, v, c in self.edges:
            adj[u].append((v, c))
            adj[v].append((u, c))
        for lst in adj:
            lst.sort()
        return adj

    @cached_property
    def cost(self) -> dict[tuple[int, int], float]:
        return {(u, v): c for u, v, c in self.edges}

    @cached_property
    def terminal_set(self) -> frozenset[int]:
        return frozenset(self.terminals)

    @cached_property
    def terminal_index(self) -> dict[int, int]:
        return {t: i for i, t in enumerate(self.terminals)}

    @property
    def nonterminals(self) -> list[int]:
        ts = self.terminal_set
        return [v for v in range(self.n) if v not in ts]

    @property
    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return len(self.edges) / (self.n * (self.n - 1) / 2)

    def edge_cost(self, u: int, v: int) -> float:
        return self.cost[edge_key(u, v)]

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y, _ in self.adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == self.n

    def with_terminals(self, terminals: Iterable[int]) -> "Instance":
        """Same graph, different terminal set (no revalidation of edges)."""
        terms = tuple(sorted(set(terminals)))
        return Instance(self.n, self.edges, terms, self.name)


@dataclass(frozen=True)
class Tree:
    """A tree given by its edges ``(u, v, cost)``."""

    edges: tuple[tuple[int, int, float], ...]

    @property
    def cost(self) -> float:
        return float(sum(c for _, _, c in self.edges))

    @property
    def nodes(self) -> set[int]:
        out: set[int] = set()
        for u, v, _ in self.edges:
            out.add(u)
            out.add(v)
        return out


def mst(nodes: Iterable[int], edges: Iterable[tuple[int, int, float]]) -> Tree:
    """Kruskal's minimum spanning tree.

    Ties are broken by input position, so the result is deterministic.
    Raises ``ValueError`` if the edges do not connect ``nodes``.
    """
    nodes = list(nodes)
    index = {v: i for i, v in enumerate(nodes)}
    edges = list(edges)
    order = sorted(range(len(edges)), key=lambda i: (edges[i][2], i))
    uf = UnionFind(len(nodes))
    chosen = []
    for i in order:
        u, v, c = edges[i]
        if uf.union(index[u], index[v]):
            chosen.append((u, v, c))
            if len(chosen) == len(nodes) - 1:
                break
    if len(nodes) > 1 and len(chosen) != len(nodes) - 1:
        raise ValueError("graph is disconnected; no spanning tree exists")
    return Tree(tuple(chosen))


@dataclass(frozen=True)
class DistanceOracle:
    """Precomputed shortest paths.

    ``dist``, ``pred`` and ``valid`` have one row per source. In ``apsp``
    mode every node is a source; in ``sssp`` mode only terminals are, and
    a pair is answered iff at least one endpoint is a terminal.

    A pair is *valid* iff the recorded path has no terminal strictly
    between its endpoints.
    """

    mode: str
    policy: str
    sources: tuple[int, ...]
    dist: np.ndarray
    pred: np.ndarray
    valid: np.ndarray
    terminal_set: frozenset[int] = field(repr=False)

    @cached_property
    def row_of(self) -> dict[int, int]:
        return {s: i for i, s in enumerate(self.sources)}

    def _locate(self, u: int, v: int) -> tuple[int, int, bool]:
        row = self.row_of.get(u)
        if row is not None:
            return row, v, False
        row = self.row_of.get(v)
        if row is not None:
            return row, u, True
        raise KeyError(f"pair ({u}, {v}) not available in {self.mode} oracle")

    def has_pair(self, u: int, v: int) -> bool:
        return u in self.row_of or v in self.row_of

    def d(self, u: int, v: int) -> float:
        if u == v:
            return 0.0
        row, col, _ = self._locate(u, v)
        return float(self.dist[row, col])

    def is_valid(self, u: int, v: int) -> bool:
        if u == v:
            return True
        row, col, _ = self._locate(u, v)
        return bool(self.valid[row, col])

    def path(self, u: int, v: int) -> list[int]:
        """Node sequence of the recorded ``u``-``v`` path."""
        if u == v:
            return [u]
        row, col, flipped = self._locate(u, v)
        if not math.isfinite(self.dist[row, col]):
            raise ValueError(f"no recorded path between {u} and {v}")
        src = self.sources[row]
        seq = [col]
        pred = self.pred[row]
        x = col
        while x != src:
            x = int(pred[x])
            seq.append(x)
        seq.reverse()
        return seq[::-1] if flipped else seq

    def valid_pair_fraction(self, terminals: Sequence[int]) -> float:
        """Share of unordered terminal pairs with a valid recorded path."""
        pairs = 0
        good = 0
        for i, a in enumerate(terminals):
            for b in terminals[i + 1:]:
                pairs += 1
                good += self.is_valid(a, b) and math.isfinite(self.d(a, b))
        return good / pairs if pairs else 1.0


def _single_source(inst: Instance, src: int, policy: str):
    """Dijkstra from ``src``.

    Labels are ``(distance, -interior terminal count, predecessor)``
    under ``prefer``; under ``forbid`` terminals other than the source
    are reached but never expanded.
    """
    n = inst.n
    terms = inst.terminal_set
    adj = inst.adjacency
    dist = [INF] * n
    count = [0] * n
    pred = [-1] * n
    done = [False] * n
    dist[src] = 0.0
    pred[src] = src
    heap = [(0.0, 0, src, src)]
    forbid = policy == "forbid"
    while heap:
        d, negc, p, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        if forbid and x != src and x in terms:
            continue
        inner = count[x] + (1 if (x != src and x in terms) else 0)
        for y, c in adj[x]:
            if done[y]:
                continue
            nd = d + c
            label = (nd, -inner, x)
            if label < (dist[y], -count[y], pred[y] if pred[y] >= 0 else n):
                dist[y] = nd
                count[y] = inner
                pred[y] = x
                heapq.heappush(heap, (nd, -inner, x, y))
    dist_a = np.array(dist, dtype=float)
    if forbid:
        valid = np.isfinite(dist_a)
    else:
        valid = np.array([c == 0 for c in count]) & np.isfinite(dist_a)
    return dist_a, np.array(pred, dtype=np.int64), valid


def shortest_paths(inst: Instance, mode: str = "apsp", policy: str = "prefer") -> DistanceOracle:
    """Compute a :class:`DistanceOracle`.

    ``mode`` is ``"apsp"`` (every node is a source) or ``"sssp"`` (terminal
    sources only). ``policy`` is ``"prefer"`` (plain shortest paths, ties
    broken towards paths with more interior terminals, which are then
    marked invalid) or ``"forbid"`` (searches never pass through a
    terminal; unreachable pairs get distance ``inf`` and are invalid).

    The ``prefer`` tie-break is exact for positive edge costs; with
    zero-cost edges it is applied in settle order.
    """
    if mode not in ("apsp", "sssp"):
        raise ValueError(f"unknown mode {mode!r}")
    if policy not in ("prefer", "forbid"):
        raise ValueError(f"unknown policy {policy!r}")
    sources = tuple(range(inst.n)) if mode == "apsp" else inst.terminals
    rows = [_single_source(inst, s, policy) for s in sources]
    dist = np.vstack([r[0] for r in rows])
    pred = np.vstack([r[1] for r in rows])
    valid = np.vstack([r[2] for r in rows])
    return DistanceOracle(mode, policy, sources, dist, pred, valid, inst.terminal_set)


def metric_closure(
    oracle: DistanceOracle, nodes: Sequence[int], valid_only: bool = False
) -> list[tuple[int, int, float]]:
    """Edges of the complete graph on ``nodes`` with shortest-path costs.

    With ``valid_only`` pairs whose recorded path crosses a terminal (or
    that are unreachable) are left out.
    """
    out = []
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            d = oracle.d(u, v)
            if valid_only and (not oracle.is_valid(u, v) or not math.isfinite(d)):
                continue
            out.append((u, v, d))
    return out


@dataclass(frozen=True)
class VoronoiPartition:
    """Owner terminal, distance to owner and search predecessor per node."""

    owner: np.ndarray
    dist: np.ndarray
    pred: np.ndarray

    def region(self, terminal: int) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.owner == terminal)]

    def path_to_owner(self, v: int) -> list[int]:
        seq = [v]
        while self.pred[seq[-1]] != seq[-1]:
            seq.append(int(self.pred[seq[-1]]))
        return seq


def voronoi_regions(inst: Instance) -> VoronoiPartition:
    """Multi-source Dijkstra from all terminals.

    Labels are ``(distance, terminal index)``, so a node equidistant to
    several terminals goes to the lowest-index one.
    """
    n = inst.n
    adj = inst.adjacency
    dist = [INF] * n
    owner = [-1] * n
    pred = [-1] * n
    done = [False] * n
    heap = []
    for i, t in enumerate(inst.terminals):
        dist[t] = 0.0
        owner[t] = i
        pred[t] = t
        heap.append((0.0, i, t, t))
    heapq.heapify(heap)
    terms = inst.terminal_set
    while heap:
        d, o, _, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        for y, c in adj[x]:
            if done[y] or y in terms:
                continue
            nd = d + c
            if (nd, o, x) < (dist[y], owner[y] if owner[y] >= 0 else n, pred[y] if pred[y] >= 0 else n):
                dist[y] = nd
                owner[y] = o
                pred[y] = x
                heapq.heappush(heap, (nd, o, x, y))
    term_ids = np.array(inst.terminals)
    return VoronoiPartition(term_ids[np.array(owner)], np.array(dist), np.array(pred, dtype=np.int64))


def max_flow(
    arcs: Iterable[tuple[object, object, float]],
    source: object,
    sinks: Iterable[object],
) -> tuple[float, set]:
    """Maximum flow from ``source`` to the merged ``sinks``.

    Returns the flow value and the sink side of a minimum cut (the merged
    super-sink is not part of the returned set, its members are).
    Parallel arcs are summed.
    """
    sinks = set(sinks)
    g = nx.DiGraph()
    g.add_node(source)
    super_sink = ("__sink__",)
    g.add_node(super_sink)

    def node(x):
        return super_sink if x in sinks else x

    for u, v, cap in arcs:
        if cap < 0:
            raise ValueError("negative capacity")
        a, b = node(u), node(v)
        if a == b:
            continue
        if g.has_edge(a, b):
            g[a][b]["capacity"] += cap
        else:
            g.add_edge(a, b, capacity=cap)
    value, (_, sink_side) = nx.minimum_cut(g, source, super_sink)
    sink_side = set(sink_side)
    sink_side.discard(super_sink)
    return float(value), sink_side | sinks
