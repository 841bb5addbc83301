import itertools
import math

import networkx as nx
import pytest

from helpers import random_instance, star, voronoi_gap
from steinapprox import Instance, shortest_paths, voronoi_regions
from steinapprox.components import (
    ComponentSet,
    FullComponent,
    compute_loss,
    expand,
    gen_all_dw,
    gen_all_naive,
    gen_all_smart,
    gen_voronoi,
    generate,
    select_core_edges,
)
from steinapprox.exact import dreyfus_wagner, restricted_optimum

STRATEGIES = ["all:naive", "all:smart", "all:dw", "voronoi"]


def star_comp(costs):
    edges = tuple((0, i + 1, float(c)) for i, c in enumerate(costs))
    return FullComponent(tuple(range(1, len(costs) + 1)), edges, tuple((0, i + 1) for i in range(len(costs))))


def nx_mst_cost(edges):
    g = nx.Graph()
    for a, b, c in edges:
        if not g.has_edge(a, b) or g[a][b]["weight"] > c:
            g.add_edge(a, b, weight=c)
    return nx.minimum_spanning_tree(g).size(weight="weight")


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_star_components(strategy):
    inst = star()
    comps = generate(inst, shortest_paths(inst), 3, strategy)
    assert comps.costs() == {(1, 2): 2.0, (1, 3): 2.0, (2, 3): 2.0, (1, 2, 3): 3.0}


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_k2_is_pair_shortest_paths(strategy, rng):
    for _ in range(10):
        inst = random_instance(rng, n=9, r=4)
        o = shortest_paths(inst)
        comps = generate(inst, o, 2, strategy)
        want = {(a, b): o.d(a, b) for a, b in itertools.combinations(inst.terminals, 2) if o.is_valid(a, b)}
        assert comps.costs() == pytest.approx(want)


def test_no_nonterminals_only_pairs(rng):
    inst = random_instance(rng, n=5, r=5, extra=4)
    for strategy in STRATEGIES:
        assert all(len(c.terminals) == 2 for c in generate(inst, shortest_paths(inst), 3, strategy))


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_component_invariants(strategy, rng):
    for _ in range(15):
        inst = random_instance(rng, n=9, r=5, integer=False)
        o = shortest_paths(inst)
        for c in generate(inst, o, 4, strategy):
            c.check()
            # metric edge costs are distances and leaves are exactly the terminals
            for a, b, w in c.edges:
                assert w == pytest.approx(o.d(a, b))
            assert not set(c.inner) & inst.terminal_set
            # a closure MST on the same nodes may use terminal-terminal edges
            closure = [(a, b, o.d(a, b)) for a, b in itertools.combinations(c.nodes, 2)]
            assert nx_mst_cost(closure) <= c.cost + 1e-9


def test_dw_components_are_optimal(rng):
    for _ in range(15):
        inst = random_instance(rng, n=9, r=5, integer=False)
        o = shortest_paths(inst)
        tab = dreyfus_wagner(inst, o, limit=4)
        for c in gen_all_dw(inst, o, 4):
            assert c.cost == pytest.approx(tab.cost(c.terminals))


def test_expansion_not_longer_than_metric_cost(rng):
    for _ in range(15):
        inst = random_instance(rng, n=10, r=5)
        for c in generate(inst, shortest_paths(inst), 3, "all:naive"):
            exp = expand(c)
            assert sum(inst.edge_cost(a, b) for a, b in exp) <= c.cost + 1e-9
            g = nx.Graph(list(exp))
            assert set(c.terminals) <= set(g.nodes) and nx.is_connected(g)


def test_loss_examples():
    loss, cost = compute_loss(star_comp([1, 1, 1]))
    assert len(loss) == 1 and cost == 1
    loss, cost = compute_loss(star_comp([1, 2, 3]))
    assert loss == (0,) and cost == 1
    pair = FullComponent((0, 1), ((0, 1, 5.0),), ((0, 1),))
    assert compute_loss(pair) == ((), 0.0)


def test_loss_contraction_bound(rng):
    # MST(M / C) plus the core edges spans M / Loss(C), so the loss-contracted
    # MST is never heavier; equality needs every core edge in that MST
    for _ in range(20):
        inst = random_instance(rng, n=10, r=5, integer=False)
        o = shortest_paths(inst)
        metric = [(a, b, o.d(a, b)) for a, b in itertools.combinations(inst.terminals, 2)]
        for c in generate(inst, o, 4, "all:naive").without_pairs():
            loss = set(c.loss[0])
            shrunk = [(a, b, 0.0 if i in loss else w) for i, (a, b, w) in enumerate(c.edges)]
            lhs = nx_mst_cost(metric + shrunk)
            zeros = [(c.terminals[0], t, 0.0) for t in c.terminals[1:]]
            rhs = nx_mst_cost(metric + zeros) + c.cost - c.loss_cost
            assert lhs <= rhs + 1e-9


def test_loss_contraction_identity_on_star():
    inst = star()
    o = shortest_paths(inst)
    c = generate(inst, o, 3, "all:naive")[(1, 2, 3)]
    metric = [(a, b, o.d(a, b)) for a, b in itertools.combinations(inst.terminals, 2)]
    loss = set(c.loss[0])
    lhs = nx_mst_cost(metric + [(a, b, 0.0 if i in loss else w) for i, (a, b, w) in enumerate(c.edges)])
    assert lhs == 0 + c.cost - c.loss_cost == 2


@pytest.mark.parametrize("seed", [None, 0, 1, 7])
def test_core_edges_separate_terminals(seed, rng):
    for _ in range(10):
        inst = random_instance(rng, n=10, r=5)
        for c in generate(inst, shortest_paths(inst), 4, "all:naive").without_pairs():
            core = select_core_edges(c, seed)
            assert len(core) == len(c.terminals) - 1
            g = nx.Graph()
            g.add_nodes_from(c.nodes)
            g.add_edges_from((a, b) for i, (a, b, _) in enumerate(c.edges) if i not in core)
            comp_of = {v: i for i, part in enumerate(nx.connected_components(g)) for v in part}
            assert len({comp_of[t] for t in c.terminals}) == len(c.terminals)


def test_dw_agrees_with_naive(rng):
    # float costs: DW's map is a sub-map of naive's; DW never costs more
    for _ in range(40):
        inst = random_instance(rng, n=9, r=5, integer=False)
        o = shortest_paths(inst)
        naive = gen_all_naive(inst, o, 3).costs()
        dw = gen_all_dw(inst, o, 3).costs()
        for key, cost in dw.items():
            assert key in naive
            assert cost == pytest.approx(naive[key])


def test_dw_never_costlier_than_naive(rng):
    for _ in range(40):
        inst = random_instance(rng, n=9, r=5)
        o = shortest_paths(inst)
        naive = gen_all_naive(inst, o, 4).costs()
        dw = gen_all_dw(inst, o, 4).costs()
        for key in dw.keys() & naive.keys():
            assert dw[key] <= naive[key] + 1e-9


def test_smart_and_voronoi_not_cheaper_than_naive(rng):
    for _ in range(40):
        inst = random_instance(rng, n=10, r=5)
        o = shortest_paths(inst)
        naive = gen_all_naive(inst, o, 3)
        for other in (gen_all_smart(inst, o, 3), gen_voronoi(inst, o, 3)):
            costs = other.costs()
            for key in costs.keys() & naive.costs().keys():
                assert costs[key] >= naive[key].cost - 1e-9
            assert restricted_optimum(inst.terminals, other) >= restricted_optimum(inst.terminals, naive) - 1e-9


def test_smart_covers_naive_terminal_sets(rng):
    for _ in range(20):
        inst = random_instance(rng, n=10, r=5)
        o = shortest_paths(inst)
        assert set(gen_all_naive(inst, o, 3).costs()) <= set(gen_all_smart(inst, o, 3).costs())


def test_component_set_keeps_cheapest():
    a = ComponentSet("x", 3)
    a.add(star_comp([1, 1, 1]))
    a.add(star_comp([2, 2, 2]))
    assert len(a) == 1 and a[(1, 2, 3)].cost == 3
    b = ComponentSet("x", 3)
    b.add(star_comp([0.5, 0.5, 0.5]))
    assert a.merge(b)[(1, 2, 3)].cost == 1.5
    assert (1, 2, 3) in a


def test_dump_format():
    inst = star()
    text = generate(inst, shortest_paths(inst), 3, "all:naive").dump()
    lines = text.strip().splitlines()
    assert lines[0].startswith("# strategy=all:naive k=3")
    assert "1 2 3 | 3 |" in text
    assert len(lines) == 5


def test_unknown_strategy():
    with pytest.raises(ValueError):
        generate(star(), shortest_paths(star()), 3, "bogus")


def test_restricted_optimum_assembles_star():
    inst = star()
    comps = generate(inst, shortest_paths(inst), 3, "all:naive")
    assert restricted_optimum(inst.terminals, comps) == 3
    assert restricted_optimum(inst.terminals, comps.without_pairs()) == 3
    assert math.isinf(restricted_optimum([1, 2, 3], [star_comp([1, 1])]))


@pytest.mark.parametrize("eps", [0.25, 0.1, 0.5])
def test_voronoi_gap_fixture(eps):
    inst = voronoi_gap(eps)
    o = shortest_paths(inst)
    vor = voronoi_regions(inst)
    assert [int(vor.owner[v]) for v in (5, 6)] == [0, 1]
    full = generate(inst, o, 4, "all:naive")
    restricted = generate(inst, o, 4, "voronoi")
    assert restricted_optimum(inst.terminals, full) == pytest.approx(8 + 4 * eps)
    assert restricted_optimum(inst.terminals, restricted) == pytest.approx(9 + 3 * eps)
    # the winning 4-component needs node 5 without terminal 0
    assert full[(1, 2, 3, 4)].cost == pytest.approx(7 + 4 * eps)
    assert 5 in full[(1, 2, 3, 4)].inner
    assert restricted[(1, 2, 3, 4)].cost > full[(1, 2, 3, 4)].cost + 0.5
    dw = gen_all_dw(inst, o, 4)
    assert dw[(1, 2, 3, 4)].cost == pytest.approx(full[(1, 2, 3, 4)].cost)
    assert restricted_optimum(inst.terminals, dw) == pytest.approx(8 + 4 * eps)


def test_voronoi_gap_ratio_tends_to_nine_eighths():
    ratios = []
    for eps in (0.5, 0.1, 0.01, 0.001):
        inst = voronoi_gap(eps)
        o = shortest_paths(inst)
        a = restricted_optimum(inst.terminals, generate(inst, o, 4, "all:naive"))
        b = restricted_optimum(inst.terminals, generate(inst, o, 4, "voronoi"))
        ratios.append(b / a)
    assert ratios == sorted(ratios)
    assert ratios[-1] == pytest.approx(9 / 8, abs=1e-3)
