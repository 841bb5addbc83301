"""
When Voronoi components miss the optimum
========================================

For k = 3 the best win over Voronoi-restricted components always equals
the best win over all components. For k = 4 that fails: on this graph
the cheapest 4-restricted tree needs a component whose inner node lies
in another terminal's Voronoi region.
"""

from steinapprox import Instance, shortest_paths, voronoi_regions
from steinapprox.components import generate
from steinapprox.exact import restricted_optimum

for eps in (0.5, 0.25, 0.1, 0.01):
    edges = [
        (0, 5, 2.0), (5, 2, 2.0 + eps), (5, 3, 2.0 + eps), (5, 6, 1.0 + eps),
        (1, 6, 1.0), (6, 4, 1.0 + eps), (0, 4, 1.0),
    ]
    inst = Instance.build(7, edges, [0, 1, 2, 3, 4])
    oracle = shortest_paths(inst)
    full = restricted_optimum(inst.terminals, generate(inst, oracle, 4, "all"))
    vor = restricted_optimum(inst.terminals, generate(inst, oracle, 4, "voronoi"))
    print(f"eps={eps:<5g} all: {full:6.3f} (8+4eps)  voronoi: {vor:6.3f} (9+3eps)  ratio {vor / full:.4f}")

# node 5 belongs to terminal 0's region, yet the winning component joins
# terminals 1..4 through it
regions = voronoi_regions(inst)
print("owners of the nonterminals:", {v: int(regions.owner[v]) for v in (5, 6)})
print("ratio tends to 9/8 =", 9 / 8)
