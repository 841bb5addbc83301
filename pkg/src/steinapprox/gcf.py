"""Greedy contraction over k-restricted components (GCF) and its
loss-contracting variant (LCA)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .budget import Deadline
from .components import ComponentSet, FullComponent, expand
from .graph import DistanceOracle, Instance, mst, shortest_paths
from .saveoracle import make_save_oracle
from .twoapprox import SteinerTree, path_edges, prune_to_steiner_tree, tm

__all__ = ["ContractionState", "WINS", "win_value", "is_promising", "ondemand_best_3comp", "run_gcf", "GcfResult"]

log = logging.getLogger(__name__)

WINS = ("abs", "rel", "loss")
REL_TOL = 1e-9


class ContractionState:
    """Terminal metric graph ``M`` with appended edges, its MST and a save
    oracle over terminal indices ``0..|R|-1``."""

    def __init__(self, inst: Instance, oracle: DistanceOracle, save: str = "static"):
        self.inst = inst
        self.oracle = oracle
        self.terminals = list(inst.terminals)
        self.index = {t: i for i, t in enumerate(self.terminals)}
        r = len(self.terminals)
        base = []
        for i in range(r):
            for j in range(i + 1, r):
                d = oracle.d(self.terminals[i], self.terminals[j])
                if math.isfinite(d):
                    base.append((i, j, d))
        self.tree = list(mst(range(r), base).edges)
        self.base_tree_cost = self.cost
        self.appended: list[tuple[int, int, float]] = []
        self.kind = save
        self.save_oracle = make_save_oracle(save, r, self.tree)

    @property
    def cost(self) -> float:
        return float(sum(c for _, _, c in self.tree))

    def bottleneck(self, i: int, j: int) -> float:
        return self.save_oracle.query(i, j)

    def save_of(self, terms: Sequence[int]) -> float:
        """MST cost decrease from contracting the given terminals (node ids).

        Terminals are merged in increasing id order; each merge removes the
        largest edge between the new terminal and the merged class.
        """
        idx = sorted(self.index[t] for t in terms)
        total = 0.0
        for p, i in enumerate(idx[1:], start=1):
            total += min(self.bottleneck(j, i) for j in idx[:p])
        return total

    def save(self, c: FullComponent) -> float:
        return self.save_of(c.terminals)

    def append(self, edges: Sequence[tuple[int, int, float]]) -> None:
        """Append edges given on terminal node ids and refresh the MST."""
        new = [(self.index[a], self.index[b], float(w)) for a, b, w in edges]
        new = [(a, b, w) if a < b else (b, a, w) for a, b, w in new if a != b]
        self.appended.extend(new)
        self.tree = list(mst(range(len(self.terminals)), self.tree + new).edges)
        self.save_oracle.update(self.tree, new)

    def contract(self, c: FullComponent) -> None:
        first = c.terminals[0]
        self.append([(first, t, 0.0) for t in c.terminals[1:]])

    def loss_contract(self, c: FullComponent) -> None:
        """Append the non-loss edges of ``c``, each moved to the pair of
        terminals whose loss trees it joins."""
        loss = set(c.loss[0])
        owner = _loss_owner(c, loss)
        edges = []
        for i, (a, b, w) in enumerate(c.edges):
            if i not in loss:
                edges.append((owner[a], owner[b], w))
        self.append(edges)

    def all_pairs(self) -> list[float]:
        r = len(self.terminals)
        return [self.bottleneck(i, j) for i in range(r) for j in range(i + 1, r)]


def _loss_owner(c: FullComponent, loss: set[int]) -> dict[int, int]:
    adj: dict[int, list[int]] = {}
    for i in loss:
        a, b, _ = c.edges[i]
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    owner = {}
    for t in c.terminals:
        owner[t] = t
        stack = [t]
        while stack:
            x = stack.pop()
            for y in adj.get(x, ()):
                if y not in owner:
                    owner[y] = t
                    stack.append(y)
    return owner


def win_value(kind: str, save: float, cost: float, loss: float) -> float:
    """Win of a component with the given save, cost and loss cost."""
    if kind == "abs":
        return save - cost
    if kind == "rel":
        if cost > 0:
            return save / cost
        return math.inf if save > 0 else 1.0
    if kind == "loss":
        gain = save - cost
        if loss > 0:
            return gain / loss
        return math.inf if gain > REL_TOL * max(1.0, cost) else min(gain, 0.0)
    raise ValueError(f"unknown win function {kind!r}")


def is_promising(kind: str, value: float, cost: float) -> bool:
    if kind == "rel":
        return value > 1.0 + REL_TOL
    if kind == "abs":
        return value > REL_TOL * max(1.0, cost)
    return value > REL_TOL


def _win(state: ContractionState, c: FullComponent, kind: str) -> float:
    return win_value(kind, state.save(c), c.cost, c.loss_cost if kind == "loss" else 0.0)


def ondemand_best_3comp(state: ContractionState, kind: str = "abs", k: int = 3):
    """Best 3-component found greedily per nonterminal center.

    For center ``v``: ``s0`` is the nearest terminal, ``s1`` maximises the
    bottleneck to ``s0`` minus its distance to ``v``, and ``s2`` maximises
    the absolute win of the resulting star. Returns ``(component, win)``
    or ``None`` if no star has a positive win.
    """
    if kind != "abs" or k != 3:
        raise ValueError("on-demand generation supports only win=abs with k=3")
    inst, oracle = state.inst, state.oracle
    terms = state.terminals
    best = None
    best_key = None
    for v in inst.nonterminals:
        reach = []
        for t in terms:
            if oracle.is_valid(t, v):
                d = oracle.d(t, v)
                if math.isfinite(d):
                    reach.append((d, t))
        if len(reach) < 3:
            continue
        dist = {t: d for d, t in reach}
        s0 = min(reach)[1]
        i0 = state.index[s0]
        s1 = max(
            (t for _, t in reach if t != s0),
            key=lambda t: (state.bottleneck(i0, state.index[t]) - dist[t], -t),
        )
        chosen = None
        for _, s2 in reach:
            if s2 in (s0, s1):
                continue
            ts = tuple(sorted((s0, s1, s2)))
            cost = dist[s0] + dist[s1] + dist[s2]
            w = state.save_of(ts) - cost
            key = (w, -cost, tuple(-x for x in ts))
            if chosen is None or key > chosen[0]:
                chosen = (key, ts, w)
        key, ts, w = chosen
        if best_key is None or key > best_key:
            best_key = key
            edges = [(min(v, t), max(v, t), dist[t]) for t in ts]
            comp = FullComponent(ts, tuple(edges), tuple(tuple(oracle.path(a, b)) for a, b, _ in edges))
            best = (comp, w)
    if best is None or not is_promising("abs", best[1], best[0].cost):
        return None
    return best


@dataclass
class GcfResult:
    tree: SteinerTree
    chosen: list[FullComponent] = field(default_factory=list)
    wins: list[float] = field(default_factory=list)
    bounds: list[float] = field(default_factory=list)
    initial_bound: float = 0.0


def _order_key(win: float, c: FullComponent):
    return (-win, c.cost, c.terminals)


def _assemble(inst, state, chosen, assembly):
    if assembly == "tm":
        extra = set(inst.terminals)
        for c in chosen:
            for p in c.paths:
                extra.update(p)
        return tm(inst, sorted(extra))
    if assembly == "mst":
        edges: set = set()
        for c in chosen:
            edges |= expand(c)
        appended = {(a, b) for a, b, _ in state.appended}
        for a, b, _ in state.tree:
            if (a, b) in appended:
                continue
            ta, tb = state.terminals[a], state.terminals[b]
            edges.update(path_edges(state.oracle.path(ta, tb)))
        return prune_to_steiner_tree(inst, edges)
    raise ValueError(f"unknown assembly {assembly!r}")


def run_gcf(
    inst: Instance,
    components: ComponentSet | str,
    win: str = "abs",
    oracle: DistanceOracle | None = None,
    save: str = "static",
    reduce: bool = False,
    singlepass: bool = False,
    loss_contract: bool = False,
    assembly: str = "tm",
    deadline: Deadline | None = None,
    on_step=None,
) -> GcfResult:
    """Greedy contraction.

    ``components`` is a :class:`ComponentSet` or the string ``"ondemand"``.
    ``loss_contract=True`` gives LCA and requires ``win="loss"``.
    ``on_step(state)`` is called before every selection, for tracing.
    """
    if win not in WINS:
        raise ValueError(f"unknown win function {win!r}")
    if loss_contract and win != "loss":
        raise ValueError("loss contraction requires win='loss'")
    if oracle is None:
        oracle = shortest_paths(inst, "apsp", "prefer")
    state = ContractionState(inst, oracle, save)
    result = GcfResult(tree=None, initial_bound=state.cost)  # type: ignore[arg-type]

    def contract(c, w):
        if loss_contract:
            state.loss_contract(c)
        else:
            state.contract(c)
        result.chosen.append(c)
        result.wins.append(w)
        result.bounds.append(state.cost)
        log.debug("contract %s win=%.6g mst=%.6g", c.terminals, w, state.cost)

    if components == "ondemand":
        if singlepass or loss_contract:
            raise ValueError("on-demand generation does not combine with singlepass or loss contraction")
        while True:
            if deadline is not None:
                deadline.check()
            if on_step is not None:
                on_step(state)
            found = ondemand_best_3comp(state, win)
            if found is None:
                break
            contract(*found)
    else:
        pool = [c for c in components if len(c.terminals) >= 3]
        if singlepass:
            scored = sorted(((_win(state, c, win), c) for c in pool), key=lambda p: _order_key(*p))
            for _, c in scored:
                if deadline is not None:
                    deadline.check()
                w = _win(state, c, win)
                if is_promising(win, w, c.cost):
                    contract(c, w)
        else:
            while pool:
                if deadline is not None:
                    deadline.check()
                if on_step is not None:
                    on_step(state)
                best = None
                keep = []
                for c in pool:
                    w = _win(state, c, win)
                    ok = is_promising(win, w, c.cost)
                    if ok or not reduce:
                        keep.append(c)
                    if ok and (best is None or _order_key(w, c) < _order_key(*best)):
                        best = (w, c)
                pool = keep
                if best is None:
                    break
                contract(best[1], best[0])
                pool.remove(best[1])
    result.tree = _assemble(inst, state, result.chosen, assembly)
    return result
