"""
From 2-approximations to greedy contraction
===========================================

A small random graph is solved with every algorithm in the package and
the costs are compared against the exact optimum.
"""

import numpy as np

from steinapprox import Instance, kmb, mehlhorn, shortest_paths, tm
from steinapprox.components import generate
from steinapprox.exact import exact_steiner_tree
from steinapprox.gcf import run_gcf
from steinapprox.lp import round_iterative

rng = np.random.default_rng(3)

# a sparse random graph: spanning tree plus a few chords, 8 terminals
n = 30
edges = [(i, int(rng.integers(0, i)), float(rng.integers(1, 11))) for i in range(1, n)]
edges += [(int(u), int(v), float(rng.integers(1, 11))) for u, v in rng.integers(0, n, (25, 2)) if u != v]
inst = Instance.build(n, edges, rng.choice(n, 8, replace=False))
print(f"{inst.n} nodes, {len(inst.edges)} edges, {len(inst.terminals)} terminals")

opt = exact_steiner_tree(inst).cost
print(f"optimum (Dreyfus-Wagner): {opt:g}")

# the classic 2-approximations only need shortest paths
for name, tree in [("tm", tm(inst)), ("kmb", kmb(inst)), ("mehlhorn", mehlhorn(inst))]:
    print(f"{name:9s} {tree.cost:6g}  gap {1000 * (tree.cost / opt - 1):6.1f} permil")

# greedy contraction works on 3-terminal full components; Voronoi
# generation keeps the number of candidates small
oracle = shortest_paths(inst)
comps = generate(inst, oracle, 3, "voronoi")
print(f"{len(comps)} components from gen=voronoi")
for win in ("abs", "rel", "loss"):
    res = run_gcf(inst, comps, win, oracle)
    print(f"gcf {win:5s} {res.tree.cost:6g}  from bound {res.initial_bound:g} in {len(res.chosen)} contractions")
lca = run_gcf(inst, comps, "loss", oracle, loss_contract=True)
print(f"lca       {lca.tree.cost:6g}")

# the LP pipeline rounds the hypergraphic relaxation component by component
res = round_iterative(inst, generate(inst, oracle, 3, "all"), seed=1)
print(f"lp        {res.tree.cost:6g}  (first LP bound {res.lower_bound:.3f})")
