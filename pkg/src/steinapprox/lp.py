"""Hypergraphic subtour-elimination relaxation over k-restricted
components: cutting planes, integral leaf pruning and sample-and-contract
rounding."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .budget import Deadline
from .components import ComponentSet, FullComponent, expand
from .graph import Instance, UnionFind, max_flow
from .simplex import linprog
from .twoapprox import SteinerTree, prune_to_steiner_tree, tm

__all__ = [
    "TAU",
    "LpInfeasible",
    "HyperEdge",
    "SerModel",
    "LpSolution",
    "lp_solve",
    "separate",
    "separate_cliques",
    "violated_subtours_bruteforce",
    "solve_ser",
    "prune_integral_leaves",
    "round_iterative",
    "RoundingResult",
]

log = logging.getLogger(__name__)

TAU = 1e-7


class LpInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class HyperEdge:
    """A component as seen by the LP: its (possibly merged) terminal set,
    its cost and the original component it stands for."""

    terminals: frozenset[int]
    cost: float
    origin: FullComponent = field(compare=False, repr=False)


@dataclass
class SerModel:
    terminals: list[int]
    edges: list[HyperEdge]
    coverage: set[int] = field(default_factory=set)
    subtours: list[frozenset[int]] = field(default_factory=list)
    cliques: list[frozenset[int]] = field(default_factory=list)
    upper_bound: float | None = None

    @classmethod
    def from_components(cls, terminals: Iterable[int], comps: Iterable[FullComponent]) -> "SerModel":
        terms = sorted(set(terminals))
        best: dict[frozenset[int], HyperEdge] = {}
        for c in comps:
            key = frozenset(c.terminals)
            if len(key) >= 2 and (key not in best or c.cost < best[key].cost):
                best[key] = HyperEdge(key, c.cost, c)
        edges = [best[k] for k in sorted(best, key=lambda s: (len(s), sorted(s)))]
        return cls(terms, edges)

    def matrices(self):
        n = len(self.edges)
        cost = np.array([e.cost for e in self.edges])
        size = np.array([len(e.terminals) for e in self.edges], dtype=float)
        a_eq = (size - 1)[None, :]
        b_eq = np.array([len(self.terminals) - 1.0])
        rows, rhs = [], []
        for v in sorted(self.coverage):
            rows.append([-1.0 if v in e.terminals else 0.0 for e in self.edges])
            rhs.append(-1.0)
        for sub in self.subtours:
            rows.append([max(len(sub & e.terminals) - 1, 0) for e in self.edges])
            rhs.append(len(sub) - 1.0)
        for cl in self.cliques:
            rows.append([1.0 if i in cl else 0.0 for i in range(n)])
            rhs.append(1.0)
        if self.upper_bound is not None:
            rows.append(list(cost))
            rhs.append(self.upper_bound)
        a_ub = np.array(rows, dtype=float).reshape(-1, n)
        return cost, a_ub, np.array(rhs), a_eq, b_eq

    def add_subtour(self, sub: Iterable[int]) -> bool:
        sub = frozenset(sub)
        if len(sub) < 2 or sub in self.subtours:
            return False
        self.subtours.append(sub)
        return True

    def add_clique(self, members: Iterable[int]) -> bool:
        cl = frozenset(members)
        if cl in self.cliques:
            return False
        self.cliques.append(cl)
        return True

    def dump(self, sol: "LpSolution | None" = None) -> str:
        out = [f"terminals {' '.join(map(str, self.terminals))}"]
        for i, e in enumerate(self.edges):
            val = "" if sol is None else f" x={sol.x[i]:.9g}"
            out.append(f"var {i} terms {' '.join(map(str, sorted(e.terminals)))} cost {e.cost:g}{val}")
        out += [f"cover {v}" for v in sorted(self.coverage)]
        out += [f"subtour {' '.join(map(str, sorted(s)))}" for s in self.subtours]
        out += [f"clique {' '.join(map(str, sorted(c)))}" for c in self.cliques]
        if self.upper_bound is not None:
            out.append(f"bound {self.upper_bound:g}")
        if sol is not None:
            out.append(f"objective {sol.objective:.9g}")
        return "\n".join(out) + "\n"


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    model: SerModel = field(repr=False)
    rounds: int = 0

    @property
    def support(self) -> list[int]:
        return [i for i, v in enumerate(self.x) if v > TAU]

    @property
    def y(self) -> dict[int, float]:
        out = {t: 0.0 for t in self.model.terminals}
        for i in self.support:
            for t in self.model.edges[i].terminals:
                out[t] += self.x[i]
        return out


def lp_solve(model: SerModel) -> LpSolution:
    if not model.edges:
        raise LpInfeasible("model has no variables")
    cost, a_ub, b_ub, a_eq, b_eq = model.matrices()
    res = linprog(cost, a_ub, b_ub, a_eq, b_eq, upper=1.0)
    if res.status == "infeasible":
        raise LpInfeasible("relaxation is infeasible")
    if res.status != "optimal":
        raise RuntimeError(f"simplex stopped with status {res.status}")
    return LpSolution(res.x, res.objective, model)


def _subtour_lhs(model: SerModel, x, sub: frozenset[int]) -> float:
    return float(sum(x[i] * max(len(sub & e.terminals) - 1, 0) for i, e in enumerate(model.edges)))


def _hyper_components(model: SerModel, support: Sequence[int]) -> list[set[int]]:
    uf = UnionFind(0)
    idx = {t: uf.add() for t in model.terminals}
    for i in support:
        ts = sorted(model.edges[i].terminals)
        for t in ts[1:]:
            uf.union(idx[ts[0]], idx[t])
    groups: dict[int, set[int]] = {}
    for t in model.terminals:
        groups.setdefault(uf.find(idx[t]), set()).add(t)
    return [groups[k] for k in sorted(groups, key=lambda k: min(groups[k]))]


def separate(sol: LpSolution, consep: bool = False) -> list[frozenset[int]]:
    """Terminal sets whose subtour constraint ``sol`` violates.

    Requires ``y_r >= 1`` for every terminal. With ``consep`` a
    disconnected support yields one constraint per connected part and no
    flow computation.
    """
    model, x = sol.model, sol.x
    y = sol.y
    low = [t for t, v in y.items() if v < 1 - 1e-6]
    if low:
        raise ValueError(f"coverage below 1 at terminals {low}")
    support = sol.support
    if consep:
        parts = _hyper_components(model, support)
        if len(parts) > 1:
            return [frozenset(p) for p in parts if len(p) >= 2]

    arcs = []
    for i in support:
        ts = sorted(model.edges[i].terminals)
        root, center = ts[0], ("c", i)
        arcs.append(("s", root, x[i]))
        arcs.append((root, center, x[i]))
        for t in ts[1:]:
            arcs.append((center, t, x[i]))
    for t in model.terminals:
        arcs.append((t, "t", max(y[t] - 1.0, 0.0)))
    threshold = sum(y.values()) - len(model.terminals) + 1
    found: list[frozenset[int]] = []
    for r in model.terminals:
        gamma, sink_side = max_flow(arcs, "s", {r, "t"})
        if gamma < threshold - TAU:
            sub = frozenset(v for v in sink_side if v in y)
            if sub not in found and _subtour_lhs(model, x, sub) > len(sub) - 1 + TAU:
                found.append(sub)
    return found


def separate_cliques(sol: LpSolution, k: int) -> list[frozenset[int]]:
    """Violated cliques (size <= k+1) of the conflict graph on the support;
    two components conflict when they share at least two terminals."""
    model, x = sol.model, sol.x
    support = sol.support
    g = nx.Graph()
    g.add_nodes_from(support)
    for a in range(len(support)):
        for b in range(a + 1, len(support)):
            i, j = support[a], support[b]
            if len(model.edges[i].terminals & model.edges[j].terminals) >= 2:
                g.add_edge(i, j)
    found = []
    for cl in nx.enumerate_all_cliques(g):
        if len(cl) > k + 1:
            break
        if len(cl) >= 2 and sum(x[i] for i in cl) > 1 + TAU:
            found.append(frozenset(cl))
    return found


def violated_subtours_bruteforce(sol: LpSolution) -> list[frozenset[int]]:
    """Every terminal subset (size >= 2) whose subtour row is violated."""
    from itertools import combinations

    model = sol.model
    out = []
    for size in range(2, len(model.terminals) + 1):
        for sub in combinations(model.terminals, size):
            s = frozenset(sub)
            if _subtour_lhs(model, sol.x, s) > size - 1 + 1e-6:
                out.append(s)
    return out


def solve_ser(
    model: SerModel,
    presep: str = "initial",
    consep: bool = False,
    stronger: bool = False,
    k: int | None = None,
    deadline: Deadline | None = None,
    max_rounds: int = 10_000,
) -> LpSolution:
    """Cutting-plane loop until no violated constraint remains."""
    if presep not in ("initial", "ondemand"):
        raise ValueError(f"unknown presep mode {presep!r}")
    if stronger and k is None:
        k = max(len(e.terminals) for e in model.edges)
    if presep == "initial":
        model.coverage.update(model.terminals)
    for rounds in range(1, max_rounds + 1):
        if deadline is not None:
            deadline.check()
        sol = lp_solve(model)
        sol.rounds = rounds
        if presep == "ondemand":
            low = [t for t, v in sol.y.items() if v < 1 - TAU and t not in model.coverage]
            if low:
                model.coverage.update(low)
                continue
        cuts = separate(sol, consep)
        added = sum(model.add_subtour(s) for s in cuts)
        if stronger:
            added += sum(model.add_clique(c) for c in separate_cliques(sol, k))
        log.debug("round %d objective %.9g cuts %d", rounds, sol.objective, added)
        if not added:
            return sol
    raise RuntimeError("cutting-plane loop did not converge")


def prune_integral_leaves(sol: LpSolution) -> tuple[list[int], set[int]]:
    """Peel components with value 1 that meet the rest of the support in
    exactly one terminal, in index order, until none is left.

    Returns the peeled variable indices and the terminals removed.
    """
    x = sol.x.copy()
    model = sol.model
    peeled: list[int] = []
    removed: set[int] = set()
    changed = True
    while changed:
        changed = False
        support = [i for i in range(len(x)) if x[i] > TAU]
        for i in support:
            if x[i] < 1 - TAU:
                continue
            others: set[int] = set()
            for j in support:
                if j != i:
                    others |= model.edges[j].terminals
            shared = model.edges[i].terminals & others
            if len(shared) == 1 or (not others and len(support) == 1):
                keep = shared if shared else {min(model.edges[i].terminals)}
                peeled.append(i)
                removed |= model.edges[i].terminals - keep
                x[i] = 0.0
                changed = True
                break
    return peeled, removed


@dataclass
class RoundingResult:
    tree: SteinerTree
    committed: list[FullComponent]
    lower_bound: float
    final_bound: float
    rounds: int


def _restrict(model: SerModel, keep_terms: set[int], merge: dict[int, int] | None = None) -> SerModel:
    """Model on a smaller terminal set, with terminals optionally merged."""
    merge = merge or {}
    terms = sorted({merge.get(t, t) for t in model.terminals if t in keep_terms or t in merge})
    tset = set(terms)
    best: dict[frozenset[int], HyperEdge] = {}
    for e in model.edges:
        if any(t not in keep_terms and t not in merge for t in e.terminals):
            continue
        key = frozenset(merge.get(t, t) for t in e.terminals)
        if len(key) < 2 or not key <= tset:
            continue
        if key not in best or e.cost < best[key].cost:
            best[key] = HyperEdge(key, e.cost, e.origin)
    edges = [best[k] for k in sorted(best, key=lambda s: (len(s), sorted(s)))]
    out = SerModel(terms, edges, upper_bound=model.upper_bound)
    touched = set(merge) | (set(model.terminals) - keep_terms)
    out.coverage = {t for t in model.coverage if t not in touched}
    out.subtours = [s for s in model.subtours if not s & touched]
    return out


def round_iterative(
    inst: Instance,
    components: ComponentSet | Iterable[FullComponent],
    seed: int | None = None,
    mode: str = "sample",
    presep: str = "initial",
    consep: bool = False,
    stronger: bool = False,
    bound: bool = False,
    prune: bool = False,
    k: int | None = None,
    deadline: Deadline | None = None,
) -> RoundingResult:
    """Solve, optionally peel integral leaves, commit one support component
    (sampled by value, or the largest value with ``mode="max"``), contract
    it and re-solve until one terminal is left.

    With ``bound`` the relaxation is capped by the shortest-path heuristic
    and, if that makes it infeasible, the heuristic tree is returned.
    """
    if mode not in ("sample", "max"):
        raise ValueError(f"unknown rounding mode {mode!r}")
    rng = np.random.default_rng(seed)
    comps = list(components)
    if k is None:
        k = max(len(c.terminals) for c in comps)
    model = SerModel.from_components(inst.terminals, comps)
    fallback = None
    if bound:
        fallback = tm(inst)
        model.upper_bound = fallback.cost * (1 + 1e-9)
    committed: list[FullComponent] = []
    lower = None
    last = None
    rounds = 0
    while len(model.terminals) > 1:
        try:
            sol = solve_ser(model, presep, consep, stronger, k, deadline)
        except LpInfeasible:
            if fallback is not None and lower is None:
                return RoundingResult(fallback, [], math.nan, math.nan, rounds)
            raise
        rounds += 1
        if lower is None:
            lower = sol.objective
        last = sol.objective
        remaining = set(model.terminals)
        if prune:
            peeled, removed = prune_integral_leaves(sol)
            if peeled:
                committed.extend(model.edges[i].origin for i in peeled)
                model = _restrict(model, remaining - removed)
                continue
        support = sol.support
        if mode == "max":
            pick = min(support, key=lambda i: (-sol.x[i], model.edges[i].cost, sorted(model.edges[i].terminals)))
        else:
            p = sol.x[support] / sol.x[support].sum()
            pick = support[int(rng.choice(len(support), p=p))]
        chosen = model.edges[pick]
        committed.append(chosen.origin)
        rep = min(chosen.terminals)
        merge = {t: rep for t in chosen.terminals}
        model = _restrict(model, remaining - set(chosen.terminals), merge)
        if len(model.terminals) > 1 and not model.edges:
            raise RuntimeError("no components left after contraction")
    edges: set = set()
    for c in committed:
        edges |= expand(c)
    tree = prune_to_steiner_tree(inst, edges)
    return RoundingResult(tree, committed, lower if lower is not None else 0.0, last or 0.0, rounds)
