"""Bottleneck queries on a spanning tree over terminal indices.

``query(i, j)`` is the largest edge cost on the tree path between ``i``
and ``j``. Three interchangeable implementations:

* :class:`MatrixSave` tabulates every pair after each change.
* :class:`StaticSave` rebuilds the Kruskal merge tree ``W(T)`` and answers
  queries by lowest common ancestor on an Euler tour with a sparse table.
* :class:`DynamicSave` keeps ``W(T)`` and patches it when an edge is
  inserted, answering queries by walking parent pointers.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .graph import UnionFind

__all__ = ["MatrixSave", "StaticSave", "DynamicSave", "make_save_oracle", "SAVE_ORACLES"]

Edge = tuple[int, int, float]


class MatrixSave:
    def __init__(self, n: int, tree: Sequence[Edge]):
        self.n = n
        self.rebuild(tree)

    def rebuild(self, tree: Sequence[Edge]) -> None:
        n = self.n
        adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for a, b, c in tree:
            adj[a].append((b, c))
            adj[b].append((a, c))
        mat = np.zeros((n, n))
        for s in range(n):
            seen = [False] * n
            seen[s] = True
            stack = [(s, 0.0)]
            while stack:
                x, m = stack.pop()
                mat[s, x] = m
                for y, c in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append((y, max(m, c)))
        self.mat = mat

    def update(self, tree: Sequence[Edge], inserted: Sequence[Edge]) -> None:
        self.rebuild(tree)

    def query(self, i: int, j: int) -> float:
        return float(self.mat[i, j])


def _merge_tree(n: int, tree: Sequence[Edge]):
    """Kruskal merge tree: leaves ``0..n-1``, one inner node per edge."""
    order = sorted(range(len(tree)), key=lambda i: (tree[i][2], i))
    uf = UnionFind(n)
    top = list(range(n))
    parent = [-1] * (2 * n - 1)
    value = [0.0] * (2 * n - 1)
    children: list[list[int]] = [[] for _ in range(2 * n - 1)]
    nxt = n
    for i in order:
        a, b, c = tree[i]
        ra, rb = uf.find(a), uf.find(b)
        ta, tb = top[ra], top[rb]
        parent[ta] = parent[tb] = nxt
        children[nxt] = [ta, tb]
        value[nxt] = c
        uf.union(ra, rb)
        top[uf.find(ra)] = nxt
        nxt += 1
    if nxt != 2 * n - 1:
        raise ValueError("edges do not form a spanning tree")
    return parent, children, value


class StaticSave:
    def __init__(self, n: int, tree: Sequence[Edge]):
        self.n = n
        self.rebuild(tree)

    def rebuild(self, tree: Sequence[Edge]) -> None:
        n = self.n
        parent, children, value = _merge_tree(n, tree)
        self.value = np.array(value)
        self.n_inner = n - 1
        root = 2 * n - 2 if n > 1 else 0
        euler: list[int] = []
        depth: list[int] = []
        first = [0] * (2 * n - 1)
        stack = [(root, 0, 0)]
        while stack:
            v, d, state = stack.pop()
            if state == 0:
                first[v] = len(euler)
            euler.append(v)
            depth.append(d)
            kids = children[v]
            if state < len(kids):
                stack.append((v, d, state + 1))
                stack.append((kids[state], d + 1, 0))
        self.first = first
        self.euler = np.array(euler)
        dep = np.array(depth)
        # sparse table of argmin-depth positions
        levels = [np.arange(len(euler))]
        span = 1
        while 2 * span <= len(euler):
            prev = levels[-1]
            a, b = prev[:-span], prev[span:]
            levels.append(np.where(dep[a] <= dep[b], a, b))
            span *= 2
        self.levels = levels
        self.depth = dep

    def update(self, tree: Sequence[Edge], inserted: Sequence[Edge]) -> None:
        self.rebuild(tree)

    def lca(self, i: int, j: int) -> int:
        lo, hi = sorted((self.first[i], self.first[j]))
        k = (hi - lo + 1).bit_length() - 1
        a = self.levels[k][lo]
        b = self.levels[k][hi - (1 << k) + 1]
        return int(self.euler[a if self.depth[a] <= self.depth[b] else b])

    def query(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self.value[self.lca(i, j)])


class DynamicSave:
    """Merge tree patched in place on edge insertion.

    Inserting ``(x, y, c)`` below the bottleneck ``f`` of ``x`` and ``y``:
    a new node of value ``c`` joins the parts of the two leaf-to-``f``
    chains with value at most ``c``; the remaining chain nodes are merged
    by value above it, and the merged chain takes ``f``'s place.
    """

    def __init__(self, n: int, tree: Sequence[Edge]):
        self.n = n
        parent, children, value = _merge_tree(n, tree)
        self.parent = parent
        self.children = children
        self.value = value
        self.free: list[int] = []

    def rebuild(self, tree: Sequence[Edge]) -> None:
        self.__init__(self.n, tree)

    def _chain(self, x: int, stop: int) -> list[int]:
        out = []
        while x != stop:
            out.append(x)
            x = self.parent[x]
        return out

    def _lca(self, i: int, j: int) -> int:
        seen = set()
        x = i
        while x != -1:
            seen.add(x)
            x = self.parent[x]
        x = j
        while x not in seen:
            x = self.parent[x]
        return x

    def query(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self.value[self._lca(i, j)])

    def insert(self, x: int, y: int, c: float) -> bool:
        """Apply one edge insertion; returns whether the tree changed."""
        if x == y:
            return False
        f = self._lca(x, y)
        if self.value[f] <= c:
            return False
        par, val, ch = self.parent, self.value, self.children
        a_chain = self._chain(x, f)
        b_chain = self._chain(y, f)
        # bottom parts stay as they are
        a_low = [v for v in a_chain if v < self.n or val[v] <= c]
        b_low = [v for v in b_chain if v < self.n or val[v] <= c]
        a_top = a_chain[len(a_low):]
        b_top = b_chain[len(b_low):]
        e = self.free.pop() if self.free else len(par)
        if e == len(par):
            par.append(-1)
            ch.append([])
            val.append(0.0)
        val[e] = c
        ch[e] = [a_low[-1], b_low[-1]]
        par[a_low[-1]] = par[b_low[-1]] = e
        # merge the upper chain parts by value; each keeps its off-chain child
        upper = sorted(a_top + b_top, key=lambda v: val[v])
        below = e
        for v in upper:
            old = ch[v]
            prev_chain = [w for w in old if w in a_chain or w in b_chain]
            off = [w for w in old if w not in prev_chain]
            ch[v] = off + [below]
            par[below] = v
            below = v
        top = below
        fp = par[f]
        par[top] = fp
        if fp != -1:
            ch[fp] = [top if w == f else w for w in ch[fp]]
        par[f] = -1
        ch[f] = []
        self.free.append(f)
        return True

    def update(self, tree: Sequence[Edge], inserted: Sequence[Edge]) -> None:
        for a, b, c in inserted:
            self.insert(a, b, c)

    def inner_count(self) -> int:
        return len(self.parent) - self.n - len(self.free)


SAVE_ORACLES = {"matrix": MatrixSave, "static": StaticSave, "dynamic": DynamicSave}


def make_save_oracle(kind: str, n: int, tree: Sequence[Edge]):
    try:
        return SAVE_ORACLES[kind](n, tree)
    except KeyError:
        raise ValueError(f"unknown save oracle {kind!r}") from None
