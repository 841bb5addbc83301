"""Command line: ``run``, ``report`` and ``rho``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .stp import read_bounds, read_records, write_records

ON_OFF = {"on": True, "off": False}


def _on_off(value: str) -> bool:
    try:
        return ON_OFF[value.lower()]
    except KeyError:
        raise argparse.ArgumentTypeError("expected on or off") from None


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="steinapprox", description="Steiner tree approximation benchmarks")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one algorithm variant over STP files or directories")
    r.add_argument("paths", nargs="+")
    r.add_argument("--algo", required=True, choices=bench.ALGOS)
    r.add_argument("--k", type=int, default=3)
    r.add_argument("--win", default="abs", choices=["abs", "rel", "loss"])
    r.add_argument("--gen", default="voronoi", choices=bench.GENS)
    r.add_argument("--dist", default="apsp", choices=["apsp", "sssp"])
    r.add_argument("--sp", default="prefer", choices=["prefer", "forbid"])
    r.add_argument("--save", default="static", choices=["matrix", "static", "dynamic"])
    r.add_argument("--reduce", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--singlepass", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--presep", default="initial", choices=["initial", "ondemand"])
    r.add_argument("--consep", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--stronger", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--bound", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--prune", type=_on_off, default=False, metavar="on|off")
    r.add_argument("--rounding", default="sample", choices=["sample", "max"])
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--time", type=float, default=60.0, help="wall-clock budget per instance in seconds")
    r.add_argument("--memory", type=float, default=2e9, help="soft memory budget in bytes")
    r.add_argument("--bounds", help="two-column file of best known costs")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out", help="CSV output file (default: stdout)")
    r.add_argument("--append", action="store_true", help="append to --out without a header")

    rep = sub.add_parser("report", help="summarise run CSVs")
    rep.add_argument("csv", nargs="+")
    rep.add_argument("--bounds")
    rep.add_argument("--groups", help="group rules TSV (default: bundled SteinLib mapping)")
    rep.add_argument("--instances", nargs="*", default=[], help="STP files or directories for sizes and groups")
    rep.add_argument("--list", action="append", default=[], metavar="NAME=FILE", help="extra group from a name list")
    rep.add_argument("--head-to-head", action="store_true", help="only instances solved by every column")
    rep.add_argument("--format", default="md", choices=["md", "csv"])
    rep.add_argument("--out")

    rho = sub.add_parser("rho", help="worst-case k-restricted ratio")
    rho.add_argument("--k", type=int, required=True)
    return p


def _cmd_run(args) -> int:
    spec = bench.RunSpec(
        algo=args.algo, k=args.k, win=args.win, gen=args.gen, dist=args.dist, sp=args.sp, save=args.save,
        reduce=args.reduce, singlepass=args.singlepass, presep=args.presep, consep=args.consep,
        stronger=args.stronger, bound=args.bound, prune=args.prune, rounding=args.rounding, seed=args.seed,
        time=args.time, memory=args.memory,
    )
    try:
        notes = spec.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for note in notes:
        logging.warning(note)
    bounds = read_bounds(Path(args.bounds).read_text()) if args.bounds else None
    records = bench.run([spec], args.paths, bounds, args.workers)
    if args.out:
        with open(args.out, "a" if args.append else "w", newline="") as fh:
            write_records(records, fh, header=not args.append)
    else:
        write_records(records, sys.stdout)
    return 0


def _cmd_report(args) -> int:
    records = []
    for path in args.csv:
        records += read_records(path)
    bounds = read_bounds(Path(args.bounds).read_text()) if args.bounds else None
    infos = {}
    for f in bench.find_instances(args.instances):
        info = bench.scan_header(f)
        infos[info.name] = info
    lists = {}
    for item in args.list:
        name, _, path = item.partition("=")
        lists[name] = set(Path(path).read_text().split())
    rules = bench.load_groups(args.groups)
    tables = bench.report(records, infos, bounds, rules, lists, args.head_to_head)
    text = "\n".join(t.markdown() if args.format == "md" else t.csv() for t in tables)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "report":
        return _cmd_report(args)
    try:
        print(f"{bench.rho_k(args.k):.12g}")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
