"""k-restricted full components: generation, loss forests and core edges."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .budget import Deadline
from .graph import DistanceOracle, Instance, UnionFind, VoronoiPartition, edge_key, mst, voronoi_regions
from .twoapprox import path_edges

__all__ = [
    "FullComponent",
    "ComponentSet",
    "compute_loss",
    "select_core_edges",
    "expand",
    "gen_all_naive",
    "gen_all_smart",
    "gen_all_dw",
    "gen_voronoi",
    "generate",
]


@dataclass(frozen=True)
class FullComponent:
    """A full component as a tree of metric-closure edges.

    ``edges[i] = (a, b, cost)`` is realised in the graph by ``paths[i]``.
    """

    terminals: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]
    paths: tuple[tuple[int, ...], ...] = field(compare=False, repr=False)

    @cached_property
    def cost(self) -> float:
        return float(sum(c for _, _, c in self.edges))

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        out = set(self.terminals)
        for a, b, _ in self.edges:
            out.update((a, b))
        return tuple(sorted(out))

    @property
    def inner(self) -> tuple[int, ...]:
        ts = set(self.terminals)
        return tuple(v for v in self.nodes if v not in ts)

    @cached_property
    def loss(self) -> tuple[tuple[int, ...], float]:
        return compute_loss(self)

    @property
    def loss_cost(self) -> float:
        return self.loss[1]

    def core_edges(self, seed: int | None = None) -> list[int]:
        return select_core_edges(self, seed)

    def check(self) -> None:
        """Assert the structural invariants of a full component."""
        ts = set(self.terminals)
        assert len(self.terminals) >= 2
        deg: dict[int, int] = {}
        for a, b, _ in self.edges:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        assert set(deg) == set(self.nodes)
        assert len(self.edges) == len(self.nodes) - 1
        for v, d in deg.items():
            assert (d == 1) if v in ts else (d >= 2), f"bad degree at {v}"
        uf = UnionFind(0)
        idx = {v: uf.add() for v in self.nodes}
        for a, b, _ in self.edges:
            assert uf.union(idx[a], idx[b]), "cycle"

    def line(self) -> str:
        ts = " ".join(str(t) for t in self.terminals)
        es = " ".join(f"{a}-{b}:{c:g}" for a, b, c in self.edges)
        return f"{ts} | {self.cost:g} | {es}"


def _kruskal_indices(c: FullComponent, order: Sequence[int]) -> list[int]:
    uf = UnionFind(0)
    idx = {v: uf.add() for v in c.nodes}
    first = idx[c.terminals[0]]
    for t in c.terminals[1:]:
        uf.union(first, idx[t])
    chosen = []
    for i in order:
        a, b, _ = c.edges[i]
        if uf.union(idx[a], idx[b]):
            chosen.append(i)
    return chosen


def compute_loss(c: FullComponent) -> tuple[tuple[int, ...], float]:
    """Loss forest of a component: indices of its edges in the MST of the
    component after the terminals are joined by zero-cost edges."""
    order = sorted(range(len(c.edges)), key=lambda i: (c.edges[i][2], i))
    chosen = tuple(sorted(_kruskal_indices(c, order)))
    return chosen, float(sum(c.edges[i][2] for i in chosen))


def select_core_edges(c: FullComponent, seed: int | None = None) -> list[int]:
    """Indices of ``|R_C| - 1`` edges whose removal separates all terminals.

    Without a seed the complement of the loss forest is returned;
    otherwise the complement of a random spanning tree of ``C / R_C``.
    """
    if seed is None:
        keep = set(c.loss[0])
    else:
        order = list(np.random.default_rng(seed).permutation(len(c.edges)))
        keep = set(_kruskal_indices(c, order))
    return [i for i in range(len(c.edges)) if i not in keep]


def expand(c: FullComponent) -> set[tuple[int, int]]:
    """Edges of the instance graph used by the component."""
    out: set[tuple[int, int]] = set()
    for p in c.paths:
        out.update(path_edges(p))
    return out


class ComponentSet:
    """At most one (cheapest) component per terminal set."""

    def __init__(self, strategy: str = "", k: int = 0):
        self.strategy = strategy
        self.k = k
        self.by_terminals: dict[tuple[int, ...], FullComponent] = {}
        self.generated = 0
        self.dropped_inner_terminal = 0

    def add(self, c: FullComponent) -> None:
        self.generated += 1
        old = self.by_terminals.get(c.terminals)
        if old is None or c.cost < old.cost:
            self.by_terminals[c.terminals] = c

    def merge(self, other: "ComponentSet") -> "ComponentSet":
        out = ComponentSet(self.strategy, max(self.k, other.k))
        for s in (self, other):
            for c in s:
                out.add(c)
            out.dropped_inner_terminal += s.dropped_inner_terminal
        out.generated = self.generated + other.generated
        return out

    def __iter__(self) -> Iterator[FullComponent]:
        return (self.by_terminals[key] for key in sorted(self.by_terminals))

    def __len__(self) -> int:
        return len(self.by_terminals)

    def __getitem__(self, terms) -> FullComponent:
        return self.by_terminals[tuple(sorted(terms))]

    def __contains__(self, terms) -> bool:
        return tuple(sorted(terms)) in self.by_terminals

    def costs(self) -> dict[tuple[int, ...], float]:
        return {key: c.cost for key, c in self.by_terminals.items()}

    def without_pairs(self) -> list[FullComponent]:
        return [c for c in self if len(c.terminals) >= 3]

    def dump(self) -> str:
        head = f"# strategy={self.strategy} k={self.k} components={len(self)}"
        return "\n".join([head] + [c.line() for c in self]) + "\n"


def _pair_cost(oracle: DistanceOracle, u: int, v: int) -> float:
    if not oracle.is_valid(u, v):
        return math.inf
    return oracle.d(u, v)


def _make(oracle: DistanceOracle, terminals: Iterable[int], edges) -> FullComponent:
    edges = tuple((min(a, b), max(a, b), float(c)) for a, b, c in edges)
    paths = tuple(tuple(oracle.path(a, b)) for a, b, _ in edges)
    return FullComponent(tuple(sorted(terminals)), edges, paths)


def _prune_steiner_leaves(edges: list, terms: set) -> list:
    edges = list(edges)
    while True:
        deg: dict[int, int] = {}
        for a, b, _ in edges:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        leaves = {v for v, d in deg.items() if d == 1 and v not in terms}
        if not leaves:
            return edges
        edges = [e for e in edges if e[0] not in leaves and e[1] not in leaves]


def _is_full(edges, terms) -> bool:
    deg: dict[int, int] = {}
    for a, b, _ in edges:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    return all(deg.get(t) == 1 for t in terms)


def _add_pairs(out: ComponentSet, inst: Instance, oracle: DistanceOracle) -> None:
    for a, b in combinations(inst.terminals, 2):
        d = _pair_cost(oracle, a, b)
        if math.isfinite(d):
            out.add(_make(oracle, (a, b), [(a, b, d)]))


def _closure_mst(oracle: DistanceOracle, nodes: Sequence[int]):
    edges = []
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            d = _pair_cost(oracle, u, v)
            if math.isfinite(d):
                edges.append((u, v, d))
    try:
        return mst(nodes, edges)
    except ValueError:
        return None


def _naive(inst, oracle, k, candidates, strategy, deadline) -> ComponentSet:
    """Shared body of gen=all:naive and gen=voronoi.

    ``candidates(terms)`` lists the nonterminals allowed as inner nodes.
    """
    if k >= 4 and oracle.mode != "apsp":
        raise ValueError("components with more than 3 terminals need an apsp oracle")
    out = ComponentSet(strategy, k)
    _add_pairs(out, inst, oracle)
    for size in range(3, k + 1):
        for terms in combinations(inst.terminals, size):
            if deadline is not None:
                deadline.check()
            tset = set(terms)
            pool = candidates(terms)
            best = _closure_mst(oracle, list(terms))
            for s in range(1, size - 1):
                for extra in combinations(pool, s):
                    tree = _closure_mst(oracle, list(terms) + list(extra))
                    if tree is not None and (best is None or tree.cost < best.cost):
                        best = tree
            if best is None:
                continue
            edges = _prune_steiner_leaves(list(best.edges), tset)
            if not _is_full(edges, tset):
                out.dropped_inner_terminal += 1
                continue
            out.add(_make(oracle, terms, edges))
    return out


def gen_all_naive(inst: Instance, oracle: DistanceOracle, k: int, deadline: Deadline | None = None) -> ComponentSet:
    """Cheapest MST over every terminal subset plus up to ``|R'| - 2``
    nonterminals; subsets whose best tree has an inner terminal are dropped."""
    nonterminals = inst.nonterminals
    return _naive(inst, oracle, k, lambda terms: nonterminals, "all:naive", deadline)


def gen_voronoi(
    inst: Instance,
    oracle: DistanceOracle,
    k: int,
    vor: VoronoiPartition | None = None,
    deadline: Deadline | None = None,
) -> ComponentSet:
    """As :func:`gen_all_naive`, with inner nodes restricted to the Voronoi
    regions of the subset's terminals."""
    vor = voronoi_regions(inst) if vor is None else vor
    regions: dict[int, list[int]] = {t: [] for t in inst.terminals}
    for v in inst.nonterminals:
        regions[int(vor.owner[v])].append(v)

    def candidates(terms):
        return sorted(v for t in terms for v in regions[t])

    return _naive(inst, oracle, k, candidates, "voronoi", deadline)


def gen_all_smart(inst: Instance, oracle: DistanceOracle, k: int, deadline: Deadline | None = None) -> ComponentSet:
    """Inner trees ``MST(G_S)`` are built once per nonterminal subset; each
    terminal is then attached to its cheapest inner node."""
    if k >= 4 and oracle.mode != "apsp":
        raise ValueError("components with more than 3 terminals need an apsp oracle")
    out = ComponentSet("all:smart", k)
    _add_pairs(out, inst, oracle)
    nonterminals = inst.nonterminals
    for size in range(3, k + 1):
        inner = []
        for s in combinations(nonterminals, size - 2):
            tree = _closure_mst(oracle, list(s))
            if tree is not None:
                inner.append((s, tree))
        if not inner:
            continue
        attach = np.full((len(inst.terminals), inst.n), math.inf)
        for i, t in enumerate(inst.terminals):
            for v in nonterminals:
                attach[i, v] = _pair_cost(oracle, t, v)
        tindex = inst.terminal_index
        for terms in combinations(inst.terminals, size):
            if deadline is not None:
                deadline.check()
            tset = set(terms)
            best = None
            best_cost = math.inf
            for s, tree in inner:
                cols = list(s)
                edges = list(tree.edges)
                ok = True
                for t in terms:
                    row = attach[tindex[t], cols]
                    j = int(np.argmin(row))
                    if not math.isfinite(row[j]):
                        ok = False
                        break
                    edges.append((t, cols[j], float(row[j])))
                if not ok:
                    continue
                edges = _prune_steiner_leaves(edges, tset)
                cost = sum(c for _, _, c in edges)
                if cost < best_cost:
                    best, best_cost = edges, cost
            if best is not None:
                out.add(_make(oracle, terms, best))
    return out


def _metric_from_tree(oracle: DistanceOracle, inst: Instance, tree_edges, terms) -> list | None:
    """Collapse degree-2 nonterminal chains of a tree in ``G`` into metric
    edges. Returns ``None`` if the tree has a terminal as an inner node."""
    tset = set(terms)
    adj: dict[int, list[int]] = {}
    for u, v in tree_edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for v in adj:
        if v in inst.terminal_set and (v not in tset or len(adj[v]) != 1):
            return None
    keep = {v for v in adj if v in tset or len(adj[v]) >= 3}
    edges = []
    seen = set()
    for start in sorted(keep):
        for nxt in adj[start]:
            if edge_key(start, nxt) in seen:
                continue
            prev, cur, cost, path = start, nxt, inst.cost[edge_key(start, nxt)], [start, nxt]
            seen.add(edge_key(start, nxt))
            while cur not in keep:
                (step,) = [w for w in adj[cur] if w != prev]
                seen.add(edge_key(cur, step))
                cost += inst.cost[edge_key(cur, step)]
                prev, cur = cur, step
                path.append(cur)
            edges.append((start, cur, cost, tuple(path)))
    return edges


def gen_all_dw(
    inst: Instance,
    oracle: DistanceOracle,
    k: int,
    deadline: Deadline | None = None,
    force: bool = False,
) -> ComponentSet:
    """Exact cheapest tree per terminal subset of size <= k from a
    restricted Dreyfus-Wagner run; trees with an inner terminal are dropped."""
    from .exact import dreyfus_wagner

    out = ComponentSet("all:dw", k)
    tab = dreyfus_wagner(inst, oracle, limit=k, deadline=deadline, force=force)
    for size in range(2, min(k, len(inst.terminals)) + 1):
        for terms in combinations(inst.terminals, size):
            if deadline is not None:
                deadline.check()
            tree = tab.tree(terms)
            metric = _metric_from_tree(tab.oracle, inst, tree.edges, terms)
            if metric is None:
                out.dropped_inner_terminal += 1
                continue
            edges = tuple((min(a, b), max(a, b), float(c)) for a, b, c, _ in metric)
            paths = tuple(p if a <= b else p[::-1] for a, b, _, p in metric)
            out.add(FullComponent(tuple(sorted(terms)), edges, paths))
    return out


def generate(
    inst: Instance,
    oracle: DistanceOracle,
    k: int,
    strategy: str = "voronoi",
    deadline: Deadline | None = None,
) -> ComponentSet:
    """Dispatch on the strategy names ``all:naive``, ``all:smart``,
    ``all:dw`` and ``voronoi`` (``all`` means ``all:naive``)."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if strategy in ("all", "all:naive"):
        return gen_all_naive(inst, oracle, k, deadline)
    if strategy == "all:smart":
        return gen_all_smart(inst, oracle, k, deadline)
    if strategy == "all:dw":
        return gen_all_dw(inst, oracle, k, deadline)
    if strategy == "voronoi":
        return gen_voronoi(inst, oracle, k, deadline=deadline)
    raise ValueError(f"unknown generation strategy {strategy!r}")
