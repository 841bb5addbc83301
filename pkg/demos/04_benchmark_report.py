"""
A miniature benchmark
=====================

Writes a handful of random instances to a temporary directory, runs
three variants through the bench harness and prints the report tables,
the same way the command line does.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from steinapprox import Instance, write_stp
from steinapprox.bench import RunSpec, report, rho_k, run, scan_header
from steinapprox.exact import exact_steiner_tree

rng = np.random.default_rng(11)
workdir = Path(tempfile.mkdtemp())
bounds = {}
for i in range(10):
    n = int(rng.integers(20, 60))
    edges = [(j, int(rng.integers(0, j)), float(rng.integers(1, 11))) for j in range(1, n)]
    edges += [(int(u), int(v), float(rng.integers(1, 11))) for u, v in rng.integers(0, n, (n, 2)) if u != v]
    inst = Instance.build(n, edges, rng.choice(n, int(rng.integers(4, 11)), replace=False))
    (workdir / f"demo{i:02d}.stp").write_text(write_stp(inst))
    bounds[f"demo{i:02d}"] = exact_steiner_tree(inst).cost

specs = [RunSpec("tm"), RunSpec("gcf", win="abs"), RunSpec("gcf", win="rel", reduce=True)]
records = run(specs, [workdir], bounds, workers=2)
infos = {p.stem: scan_header(p) for p in workdir.glob("*.stp")}
for table in report(records, infos, bounds):
    if table.rows:
        sys.stdout.write(table.markdown() + "\n")

print("worst-case k-restricted ratios:", {k: round(rho_k(k), 4) for k in (2, 3, 4, 5, 8)})
