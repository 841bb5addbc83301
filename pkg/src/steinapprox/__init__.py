"""Steiner tree approximations: 2-approximations, greedy contraction,
a hypergraphic LP pipeline and an exact dynamic program."""

from .graph import DistanceOracle, Instance, Tree, max_flow, metric_closure, mst, shortest_paths, voronoi_regions
from .stp import gap_permil, parse_stp, read_stp, write_stp
from .twoapprox import SteinerTree, kmb, mehlhorn, prune_to_steiner_tree, tm

__version__ = "0.1.0"
