"""
The subtour LP on a cycle with spokes
=====================================

Four terminals hang off a zero-cost cycle. Every full component costs
its number of terminals, so with k = 3 the LP spreads weight over the
four 3-terminal components.
"""

from steinapprox import Instance, shortest_paths
from steinapprox.components import generate
from steinapprox.exact import exact_steiner_tree, restricted_optimum
from steinapprox.lp import SerModel, round_iterative, solve_ser

edges = [(4 + i, 4 + (i + 1) % 4, 0) for i in range(4)] + [(i, 4 + i, 1) for i in range(4)]
inst = Instance.build(8, edges, [0, 1, 2, 3])
k = 3
comps = generate(inst, shortest_paths(inst), k, "all")

sol = solve_ser(SerModel.from_components(inst.terminals, comps))
print(f"LP optimum {sol.objective:.4f}, expected (k^3+k^2)/(k^2-1) = {(k**3 + k**2) / (k**2 - 1):.4f}")
for i in sol.support:
    print(f"  x{sorted(sol.model.edges[i].terminals)} = {sol.x[i]:.4f}")

# clique cuts over conflicting components tighten it
strong = solve_ser(SerModel.from_components(inst.terminals, comps), stronger=True, k=k)
print(f"with stronger=on: {strong.objective:.4f}")

# the relaxation bounds the k-restricted optimum, which here is above
# the unrestricted one
print(f"3-restricted optimum {restricted_optimum(inst.terminals, comps):g}, optimum {exact_steiner_tree(inst).cost:g}")

res = round_iterative(inst, comps, seed=0)
print(f"rounded tree {res.tree.cost:g}, committed components {sum(c.cost for c in res.committed):g}")
