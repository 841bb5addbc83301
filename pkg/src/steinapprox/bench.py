"""Benchmark harness: run algorithm variants over STP files, record
costs and times, and summarise them per instance group."""

from __future__ import annotations

import csv
import io
import logging
import math
import re
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .budget import BudgetExceeded, Deadline
from .components import generate
from .exact import TableTooLarge, exact_steiner_tree
from .gcf import run_gcf
from .graph import Instance, shortest_paths
from .lp import round_iterative
from .stp import RunRecord, StpFormatError, coverage_group, gap_permil, read_stp
from .twoapprox import kmb, mehlhorn, tm

__all__ = [
    "ALGOS",
    "RunSpec",
    "InstanceInfo",
    "ReportTable",
    "estimate_memory",
    "run_instance",
    "run",
    "find_instances",
    "scan_header",
    "load_groups",
    "instance_group",
    "report",
    "rho_k",
]

log = logging.getLogger(__name__)

ALGOS = ("tm", "kmb", "mehlhorn", "gcf", "lca", "lp", "exact")
GENS = ("all", "all:naive", "all:smart", "all:dw", "voronoi", "ondemand")


@dataclass(frozen=True)
class RunSpec:
    algo: str
    k: int = 3
    win: str = "abs"
    gen: str = "voronoi"
    dist: str = "apsp"
    sp: str = "prefer"
    save: str = "static"
    reduce: bool = False
    singlepass: bool = False
    presep: str = "initial"
    consep: bool = False
    stronger: bool = False
    bound: bool = False
    prune: bool = False
    rounding: str = "sample"
    seed: int | None = None
    time: float | None = 60.0
    memory: float | None = 2e9

    def validate(self) -> list[str]:
        """Raise on impossible combinations; return warnings."""
        notes = []
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.gen not in GENS:
            raise ValueError(f"unknown gen {self.gen!r}")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.algo in ("gcf", "lca", "lp"):
            if self.gen == "ondemand" and (self.algo != "gcf" or self.win != "abs" or self.k != 3):
                raise ValueError("gen=ondemand needs algo=gcf with win=abs and k=3")
            if self.k >= 4 and self.dist != "apsp":
                raise ValueError("k >= 4 needs dist=apsp")
            if self.gen == "voronoi" and self.k >= 4:
                notes.append("gen=voronoi may miss the best components for k >= 4")
        if self.algo == "lca" and self.win not in ("loss", "abs"):
            notes.append("lca always uses win=loss")
        return notes

    def flags(self) -> str:
        """Variant flags in ``key=value`` form, only those the algorithm uses."""
        a = self.algo
        out = []
        if a in ("kmb", "gcf", "lca", "lp"):
            out += [f"dist={self.dist}", f"sp={self.sp}"]
        if a in ("gcf", "lca", "lp"):
            out.append(f"gen={self.gen}")
        if a == "gcf":
            out += [f"win={self.win}", f"save={self.save}"]
            out += [f"reduce={'on' if self.reduce else 'off'}", f"singlepass={'on' if self.singlepass else 'off'}"]
        if a == "lca":
            out += ["win=loss", f"save={self.save}"]
        if a == "lp":
            out += [f"presep={self.presep}", f"rounding={self.rounding}"]
            for name in ("consep", "stronger", "bound", "prune"):
                out.append(f"{name}={'on' if getattr(self, name) else 'off'}")
            if self.seed is not None:
                out.append(f"seed={self.seed}")
        return " ".join(out)


def estimate_memory(spec: RunSpec, n: int, m: int, r: int) -> float:
    """Rough peak allocation in bytes, used as a soft guard."""
    graph = 64.0 * (n + m)
    if spec.algo in ("tm", "mehlhorn"):
        return graph + 32.0 * n
    if spec.algo == "exact":
        masks = 2.0 ** max(r - 1, 0)
        return graph + 24.0 * masks * n
    dist = 16.0 * n * n if spec.dist == "apsp" else 16.0 * n * r
    if spec.algo == "kmb":
        return graph + dist
    k = min(spec.k, r)
    comps = 0.0 if spec.gen == "ondemand" else sum(math.comb(r, s) for s in range(2, k + 1))
    est = graph + dist + 96.0 * k * comps
    if spec.algo == "lp":
        est += 8.0 * comps * (r + comps)
    return est


def _solve(spec: RunSpec, inst: Instance, deadline: Deadline):
    if spec.algo == "tm":
        return tm(inst, deadline=deadline)
    if spec.algo == "mehlhorn":
        return mehlhorn(inst)
    if spec.algo == "exact":
        return exact_steiner_tree(inst, deadline=deadline)
    oracle = shortest_paths(inst, spec.dist, spec.sp)
    deadline.check()
    if spec.algo == "kmb":
        return kmb(inst, oracle)
    if spec.algo in ("gcf", "lca") and spec.gen == "ondemand":
        comps = "ondemand"
    else:
        comps = generate(inst, oracle, spec.k, spec.gen, deadline)
    if spec.algo == "gcf":
        return run_gcf(
            inst, comps, spec.win, oracle, spec.save, spec.reduce, spec.singlepass, deadline=deadline
        ).tree
    if spec.algo == "lca":
        return run_gcf(inst, comps, "loss", oracle, spec.save, loss_contract=True, deadline=deadline).tree
    return round_iterative(
        inst, comps, spec.seed, spec.rounding, spec.presep, spec.consep, spec.stronger, spec.bound,
        spec.prune, spec.k, deadline,
    ).tree


def run_instance(spec: RunSpec, source: str | Path | Instance, bounds: dict[str, float] | None = None) -> RunRecord:
    """Run one instance; failures become records, never exceptions."""
    name = source.name if isinstance(source, Instance) else Path(source).stem
    base = dict(instance=name, algo=spec.algo, flags=spec.flags(), k=spec.k)
    if isinstance(source, Instance):
        inst = source
    else:
        try:
            inst = read_stp(source)
        except (OSError, StpFormatError) as exc:
            log.warning("cannot read %s: %s", source, exc)
            return RunRecord(**base, cost=None, time_s=0.0, status="error")
    if spec.memory is not None:
        need = estimate_memory(spec, inst.n, len(inst.edges), len(inst.terminals))
        if need > spec.memory:
            return RunRecord(**base, cost=None, time_s=0.0, status="memlimit")
    deadline = Deadline(spec.time)
    t0 = time.perf_counter()
    try:
        deadline.check()
        tree = _solve(spec, inst, deadline)
        deadline.check()
    except BudgetExceeded:
        return RunRecord(**base, cost=None, time_s=time.perf_counter() - t0, status="timeout")
    except (TableTooLarge, MemoryError):
        return RunRecord(**base, cost=None, time_s=time.perf_counter() - t0, status="memlimit")
    except Exception as exc:  # recorded, the batch goes on
        log.warning("%s on %s failed: %s", spec.algo, name, exc)
        return RunRecord(**base, cost=None, time_s=time.perf_counter() - t0, status="error")
    elapsed = time.perf_counter() - t0
    gap = None
    if bounds and name in bounds:
        gap = gap_permil(tree.cost, bounds[name])
    return RunRecord(**base, cost=float(tree.cost), time_s=elapsed, gap_permil=gap)


def _run_one(args):
    return run_instance(*args)


def find_instances(paths: Iterable[str | Path]) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out += sorted(q for q in p.rglob("*") if q.suffix.lower() == ".stp")
        else:
            out.append(p)
    return out


def run(
    specs: Sequence[RunSpec],
    paths: Iterable[str | Path],
    bounds: dict[str, float] | None = None,
    workers: int = 1,
) -> list[RunRecord]:
    """Every spec on every instance, in spec-major order."""
    files = find_instances(paths)
    jobs = [(s, f, bounds) for s in specs for f in files]
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


# ---- reports ----


@dataclass
class InstanceInfo:
    name: str
    n: int
    m: int
    r: int
    steinlib: str = ""


def scan_header(path: str | Path) -> InstanceInfo:
    """Node, edge and terminal counts from the declarations of an STP file."""
    n = m = r = None
    with open(path) as fh:
        for line in fh:
            tok = line.split()
            if len(tok) == 2 and tok[0].lower() in ("nodes", "edges", "terminals"):
                key, val = tok[0].lower(), int(tok[1])
                if key == "nodes":
                    n = val
                elif key == "edges":
                    m = val
                else:
                    r = val
            if n is not None and m is not None and r is not None:
                break
    if n is None or m is None or r is None:
        raise ValueError(f"{path}: missing Nodes/Edges/Terminals declaration")
    p = Path(path)
    return InstanceInfo(p.stem, n, m, r, p.parent.name.upper())


@dataclass(frozen=True)
class GroupRule:
    group: str
    steinlib: str
    pattern: str
    condition: str

    def condition_holds(self, info: InstanceInfo) -> bool:
        complete = info.m >= info.n * (info.n - 1) // 2
        if self.condition == "complete":
            return complete
        if self.condition == "sparse":
            return not complete
        simple = info.r < 300 or info.r / info.n > 0.75
        if self.condition == "simple_rect":
            return simple
        if self.condition == "hard_rect":
            return not simple
        return True


def load_groups(path: str | Path | None = None) -> list[GroupRule]:
    """Group rules from a TSV file; the bundled SteinLib mapping by default."""
    if path is None:
        text = resources.files("steinapprox").joinpath("data/steinlib_groups.tsv").read_text()
    else:
        text = Path(path).read_text()
    rules = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t") + [""] * 3
        rules.append(GroupRule(parts[0], parts[1].upper(), parts[2], parts[3].strip()))
    return rules


def instance_group(info: InstanceInfo, rules: Sequence[GroupRule]) -> str | None:
    """First rule whose SteinLib group is the instance's directory (or,
    failing that, whose name pattern matches) and whose condition holds."""
    known = {r.steinlib for r in rules}
    for rule in rules:
        if info.steinlib in known:
            hit = rule.steinlib == info.steinlib
        else:
            hit = bool(rule.pattern) and re.search(rule.pattern, info.name.lower()) is not None
        if hit and rule.condition_holds(info):
            return rule.group
    return None


def is_large(info: InstanceInfo) -> bool:
    return info.m > 16000 or info.n > 8000


@dataclass
class ReportTable:
    title: str
    columns: list[str]
    rows: list[tuple[str, int, list[tuple[float, float, float, float]]]] = field(default_factory=list)

    def markdown(self) -> str:
        head = ["Group", "#"]
        for c in self.columns:
            head += [f"{c} succ%", f"{c} opt%", f"{c} gap‰", f"{c} time s"]
        out = [f"### {self.title}", "", "| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for group, count, cells in self.rows:
            vals = [group, str(count)]
            for s, o, g, t in cells:
                vals += [f"{s:.1f}", f"{o:.1f}", _fmt(g, 2), _fmt(t, 2)]
            out.append("| " + " | ".join(vals) + " |")
        return "\n".join(out) + "\n"

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["table", "group", "instances", "column", "success_pct", "optimal_pct", "avg_gap_permil", "avg_time_s"])
        for group, count, cells in self.rows:
            for col, (s, o, g, t) in zip(self.columns, cells):
                w.writerow([self.title, group, count, col, f"{s:.4f}", f"{o:.4f}", _fmt(g, 6), _fmt(t, 6)])
        return buf.getvalue()


def _fmt(x: float, digits: int) -> str:
    return "" if math.isnan(x) else f"{x:.{digits}f}"


def _column(rec: RunRecord) -> str:
    head = rec.algo if rec.algo in ("tm", "kmb", "mehlhorn", "exact") else f"{rec.algo}{rec.k}"
    return f"{head} {rec.flags}".strip()


def report(
    records: Sequence[RunRecord],
    infos: dict[str, InstanceInfo] | None = None,
    bounds: dict[str, float] | None = None,
    rules: Sequence[GroupRule] | None = None,
    lists: dict[str, set[str]] | None = None,
    head_to_head: bool = False,
) -> list[ReportTable]:
    """Tables by instance group, by terminal coverage, for Large and for any
    named instance lists.

    Gaps come from ``bounds`` when given, else from the records. Instances
    without a gap source are dropped with a warning. With ``head_to_head``
    every row only keeps instances that all columns solved.
    """
    infos = infos or {}
    columns = sorted({_column(r) for r in records})
    by_inst: dict[str, dict[str, RunRecord]] = {}
    for rec in records:
        by_inst.setdefault(rec.instance, {})[_column(rec)] = rec
    gaps: dict[tuple[str, str], float] = {}
    keep = []
    for name, recs in sorted(by_inst.items()):
        ok = True
        for col, rec in recs.items():
            if rec.status != "success":
                continue
            if bounds is not None and name in bounds:
                gaps[name, col] = gap_permil(rec.cost, bounds[name])
            elif rec.gap_permil is not None:
                gaps[name, col] = rec.gap_permil
            else:
                ok = False
        if ok:
            keep.append(name)
        else:
            warnings.warn(f"no bound for instance {name}; excluded from the report", RuntimeWarning, stacklevel=2)

    def success(name, col):
        rec = by_inst[name].get(col)
        return rec is not None and rec.status == "success"

    def row(group, names):
        if head_to_head:
            names = [nm for nm in names if all(success(nm, c) for c in columns)]
        cells = []
        for col in columns:
            done = [nm for nm in names if success(nm, col)]
            s = 100.0 * len(done) / len(names) if names else math.nan
            opt = 100.0 * sum(gaps[nm, col] <= 1e-6 for nm in done) / len(names) if names else math.nan
            g = sum(gaps[nm, col] for nm in done) / len(done) if done else math.nan
            t = sum(by_inst[nm][col].time_s for nm in done) / len(done) if done else math.nan
            cells.append((s, opt, g, t))
        return (group, len(names), cells)

    tables = []
    if rules is not None and infos:
        groups: dict[str, list[str]] = {}
        for nm in keep:
            if nm in infos:
                g = instance_group(infos[nm], rules)
                if g is not None:
                    groups.setdefault(g, []).append(nm)
        t = ReportTable("Groups", columns)
        order = list(dict.fromkeys(r.group for r in rules))
        t.rows = [row(g, groups[g]) for g in order if g in groups]
        tables.append(t)
    if infos:
        cov: dict[str, list[str]] = {}
        for nm in keep:
            if nm in infos:
                cov.setdefault(coverage_group(infos[nm].r, infos[nm].n), []).append(nm)
        t = ReportTable("Coverage", columns)
        t.rows = [row(g, cov[g]) for g in sorted(cov, key=lambda s: int(s.split()[1]))]
        tables.append(t)
        large = [nm for nm in keep if nm in infos and is_large(infos[nm])]
        t = ReportTable("Large", columns)
        t.rows = [row("Large", large)] if large else []
        tables.append(t)
    for title, members in (lists or {}).items():
        t = ReportTable(title, columns)
        t.rows = [row(title, [nm for nm in keep if nm in members])]
        tables.append(t)
    all_table = ReportTable("All", columns)
    all_table.rows = [row("All", keep)]
    tables.append(all_table)
    return tables


def rho_k(k: int) -> float:
    """Worst-case ratio between the best k-restricted and the best Steiner tree."""
    if k < 2:
        raise ValueError("k must be at least 2")
    r = int(math.floor(math.log2(k)))
    return 1.0 + 2**r / ((r - 1) * 2**r + k)
