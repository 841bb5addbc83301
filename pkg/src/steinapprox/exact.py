"""Dreyfus-Wagner dynamic program and exact k-restricted assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .budget import Deadline
from .graph import DistanceOracle, Instance, shortest_paths
from .twoapprox import SteinerTree, path_edges, prune_to_steiner_tree

__all__ = ["DwTable", "TableTooLarge", "dreyfus_wagner", "exact_steiner_tree", "restricted_optimum"]


class TableTooLarge(MemoryError):
    pass


@dataclass
class DwTable:
    """Optimal subtree costs ``S[X][v]`` for terminal subsets ``X``.

    ``S[X][v]`` is the cost of a cheapest tree spanning the terminals of
    the bitmask ``X`` plus node ``v``. Only masks up to ``max_size`` bits
    are present.
    """

    inst: Instance
    oracle: DistanceOracle
    terminals: tuple[int, ...]
    max_size: int
    table: dict[int, np.ndarray] = field(default_factory=dict)
    via: dict[int, np.ndarray] = field(default_factory=dict)
    split: dict[int, np.ndarray] = field(default_factory=dict)

    def mask_of(self, terms: Sequence[int]) -> int:
        index = {t: i for i, t in enumerate(self.terminals)}
        m = 0
        for t in terms:
            m |= 1 << index[t]
        return m

    def cost(self, terms: Sequence[int]) -> float:
        """Optimal Steiner tree cost for a terminal subset."""
        terms = sorted(set(terms))
        if len(terms) < 2:
            return 0.0
        last = terms[-1]
        mask = self.mask_of(terms[:-1])
        return float(self.table[mask][last])

    def _collect(self, mask: int, v: int, out: set) -> None:
        if mask & (mask - 1) == 0:
            t = self.terminals[mask.bit_length() - 1]
            out.update(path_edges(self.oracle.path(t, v)))
            return
        u = int(self.via[mask][v])
        out.update(path_edges(self.oracle.path(v, u)))
        d = int(self.split[mask][u])
        self._collect(d, u, out)
        self._collect(mask ^ d, u, out)

    def tree(self, terms: Sequence[int]) -> SteinerTree:
        """Optimal tree for a subset, as an edge set of the instance graph."""
        terms = sorted(set(terms))
        if len(terms) < 2:
            return SteinerTree(frozenset(), 0.0)
        edges: set = set()
        self._collect(self.mask_of(terms[:-1]), terms[-1], edges)
        return prune_to_steiner_tree(self.inst, edges, terms)


def dreyfus_wagner(
    inst: Instance,
    oracle: DistanceOracle | None = None,
    limit: int | None = None,
    terminals: Sequence[int] | None = None,
    max_masks: int | None = None,
    force: bool = False,
    deadline: Deadline | None = None,
) -> DwTable:
    """Run the Dreyfus-Wagner recursion.

    With ``limit`` = l, every terminal subset of size <= l gets its optimum
    (masks up to l-1 bits are tabulated). Without it the full optimum is
    available. Plain shortest paths are required, so an oracle with
    another policy is replaced by a fresh one. Subsets are processed in
    increasing size; ties keep the lowest split mask and lowest bridging
    node.
    """
    if oracle is None or oracle.mode != "apsp" or oracle.policy != "prefer":
        oracle = shortest_paths(inst, "apsp", "prefer")
    terms = tuple(sorted(set(inst.terminals if terminals is None else terminals)))
    r = len(terms)
    ell = r if limit is None else min(limit, r)
    if limit is not None and r > 24 and ell >= 6 and not force:
        raise TableTooLarge(f"{r} terminals with subset limit {ell} needs force=True")
    max_size = max(ell - 1, 1)
    n_masks = sum(math.comb(r, s) for s in range(1, max_size + 1))
    if max_masks is not None and n_masks > max_masks:
        raise TableTooLarge(f"{n_masks} subsets exceed the cap of {max_masks}")

    dist = oracle.dist
    tab = DwTable(inst, oracle, terms, max_size)
    for i, t in enumerate(terms):
        tab.table[1 << i] = dist[t].copy()
    n = inst.n
    for size in range(2, max_size + 1):
        for combo in combinations(range(r), size):
            if deadline is not None:
                deadline.check()
            mask = 0
            for i in combo:
                mask |= 1 << i
            low = mask & -mask
            best = np.full(n, math.inf)
            best_split = np.zeros(n, dtype=np.int64)
            rest = mask ^ low
            sub = rest
            # every split counted once: the low bit always goes to the first part
            while True:
                d = sub | low
                if d != mask:
                    cand = tab.table[d] + tab.table[mask ^ d]
                    better = cand < best
                    best[better] = cand[better]
                    best_split[better] = d
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            full = dist + best[None, :]
            via = np.argmin(full, axis=1)
            tab.table[mask] = full[np.arange(n), via]
            tab.via[mask] = via
            tab.split[mask] = best_split
    return tab


def exact_steiner_tree(inst: Instance, oracle: DistanceOracle | None = None, **kw) -> SteinerTree:
    """Optimal Steiner tree via the full Dreyfus-Wagner recursion."""
    tab = dreyfus_wagner(inst, oracle, **kw)
    return tab.tree(inst.terminals)


def restricted_optimum(terminals: Sequence[int], components) -> float:
    """Cheapest spanning hypertree over ``terminals`` built from
    ``components`` (objects with ``terminals`` and ``cost``).

    Exponential in ``len(terminals)``; meant for small instances.
    Returns ``inf`` if the components cannot connect the terminals.
    """
    terms = sorted(set(terminals))
    r = len(terms)
    index = {t: i for i, t in enumerate(terms)}
    comps: dict[int, float] = {}
    for c in components:
        m = 0
        for t in c.terminals:
            if t not in index:
                break
            m |= 1 << index[t]
        else:
            if bin(m).count("1") >= 2:
                comps[m] = min(comps.get(m, math.inf), float(c.cost))
    full = (1 << r) - 1
    best = {1 << i: 0.0 for i in range(r)}

    def bits(m):
        return [i for i in range(r) if m >> i & 1]

    masks = sorted(range(1, full + 1), key=lambda m: bin(m).count("1"))
    for x in masks:
        if x & (x - 1) == 0:
            continue
        low = x & -x
        value = math.inf
        for cm, cc in comps.items():
            if not cm & low or cm & ~x:
                continue
            z = x & ~cm
            # attach[zz] = cheapest way to hang the set zz onto terminals of the component
            attach = {0: 0.0}
            for t in bits(cm):
                tb = 1 << t
                nxt = dict(attach)
                sub = z
                while sub:
                    hang = best.get(sub | tb, math.inf)
                    if hang < math.inf:
                        # combine with every already-covered disjoint set
                        for covered, val in attach.items():
                            if covered & sub:
                                continue
                            key = covered | sub
                            cand = val + hang
                            if cand < nxt.get(key, math.inf):
                                nxt[key] = cand
                    sub = (sub - 1) & z
                attach = nxt
            if z in attach:
                value = min(value, cc + attach[z])
        best[x] = value
    return best.get(full, math.inf)
