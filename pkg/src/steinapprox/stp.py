"""SteinLib STP reader/writer, bounds tables, gap metric and run records."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .graph import Instance

__all__ = [
    "StpFormatError",
    "parse_stp",
    "read_stp",
    "write_stp",
    "read_bounds",
    "gap_permil",
    "coverage_group",
    "RunRecord",
    "RECORD_FIELDS",
    "write_records",
    "read_records",
]

MAGIC = "33D32945"


class StpFormatError(ValueError):
    pass


def _tokens(line: str) -> list[str]:
    line = line.split("#", 1)[0]
    return line.split()


def parse_stp(text: str, name: str = "") -> Instance:
    """Parse an undirected STP 1.0 file.

    Node ids in the file are 1-based; the returned instance is 0-based.
    Unknown sections are skipped. Arc lines (``A u v w``) are rejected.
    """
    lines = text.splitlines()
    first = next((ln for ln in lines if ln.strip()), "")
    if not first.strip().upper().startswith(MAGIC):
        raise StpFormatError("missing STP header line")

    n_nodes = None
    n_edges_decl = None
    n_terms_decl = None
    edges: list[tuple[int, int, float]] = []
    terminals: list[int] = []
    section = None
    saw_eof = False

    def count(tok: list[str], lineno: int) -> int:
        try:
            return int(tok[1])
        except (IndexError, ValueError):
            raise StpFormatError(f"line {lineno}: expected '{tok[0]} <count>'") from None

    def node_id(tok: str, lineno: int) -> int:
        try:
            v = int(tok)
        except ValueError:
            raise StpFormatError(f"line {lineno}: bad node id {tok!r}") from None
        if n_nodes is None:
            raise StpFormatError(f"line {lineno}: node id before 'Nodes' declaration")
        if not 1 <= v <= n_nodes:
            raise StpFormatError(f"line {lineno}: node id {v} out of range 1..{n_nodes}")
        return v - 1

    for lineno, raw in enumerate(lines[1:], start=2):
        tok = _tokens(raw)
        if not tok:
            continue
        key = tok[0].upper()
        if key == "EOF":
            saw_eof = True
            break
        if key == "SECTION":
            if len(tok) < 2:
                raise StpFormatError(f"line {lineno}: SECTION without name")
            section = tok[1].upper()
            continue
        if key == "END":
            section = None
            continue
        if section == "GRAPH":
            if key == "NODES":
                n_nodes = count(tok, lineno)
            elif key == "EDGES":
                n_edges_decl = count(tok, lineno)
            elif key == "E":
                if len(tok) != 4:
                    raise StpFormatError(f"line {lineno}: expected 'E u v w'")
                u, v = node_id(tok[1], lineno), node_id(tok[2], lineno)
                try:
                    w = float(tok[3])
                except ValueError:
                    raise StpFormatError(f"line {lineno}: non-numeric cost {tok[3]!r}") from None
                if not math.isfinite(w) or w < 0:
                    raise StpFormatError(f"line {lineno}: invalid cost {tok[3]!r}")
                edges.append((u, v, w))
            elif key in ("A", "ARCS"):
                raise StpFormatError(f"line {lineno}: directed arcs are not supported")
        elif section == "TERMINALS":
            if key == "TERMINALS":
                n_terms_decl = count(tok, lineno)
            elif key == "T":
                terminals.append(node_id(tok[1], lineno))
            elif key in ("ROOT", "ROOTP"):
                raise StpFormatError(f"line {lineno}: rooted instances are not supported")

    if not saw_eof:
        raise StpFormatError("missing EOF marker")
    if n_nodes is None:
        raise StpFormatError("missing 'Nodes' declaration")
    if n_edges_decl is not None and n_edges_decl != len(edges):
        raise StpFormatError(f"header declares {n_edges_decl} edges, found {len(edges)}")
    if n_terms_decl == 0 or not terminals:
        raise StpFormatError("instance has no terminals")
    if n_terms_decl is not None and n_terms_decl != len(terminals):
        raise StpFormatError(f"header declares {n_terms_decl} terminals, found {len(terminals)}")
    try:
        return Instance.build(n_nodes, edges, terminals, name=name)
    except ValueError as exc:
        raise StpFormatError(str(exc)) from exc


def read_stp(path: str | Path) -> Instance:
    path = Path(path)
    return parse_stp(path.read_text(), name=path.stem)


def _fmt_cost(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(float(c))


def write_stp(inst: Instance) -> str:
    out = [f"{MAGIC} STP File, STP Format Version 1.0", ""]
    out += ["SECTION Comment", f'Name    "{inst.name}"', "END", ""]
    out += ["SECTION Graph", f"Nodes {inst.n}", f"Edges {len(inst.edges)}"]
    out += [f"E {u + 1} {v + 1} {_fmt_cost(c)}" for u, v, c in inst.edges]
    out += ["END", "", "SECTION Terminals", f"Terminals {len(inst.terminals)}"]
    out += [f"T {t + 1}" for t in inst.terminals]
    out += ["END", "", "EOF", ""]
    return "\n".join(out)


def read_bounds(text: str) -> dict[str, float]:
    """Two-column ``name value`` table; ``#`` starts a comment."""
    bounds = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = _tokens(raw)
        if not tok:
            continue
        if len(tok) != 2:
            raise ValueError(f"bounds line {lineno}: expected 'name value'")
        value = float(tok[1])
        if not value > 0:
            raise ValueError(f"bounds line {lineno}: bound must be positive")
        bounds[tok[0]] = value
    return bounds


def gap_permil(cost: float, best: float) -> float:
    """Relative excess ``cost / best - 1`` in thousandths.

    A cost below ``best`` is reported (with a warning), never clamped.
    """
    if not best > 0:
        raise ValueError("best bound must be positive")
    if cost < best * (1 - 1e-12):
        warnings.warn(
            f"cost {cost} is below the best known bound {best}; "
            "bounds table or solver is wrong",
            RuntimeWarning,
            stacklevel=2,
        )
    return (cost / best - 1.0) * 1000.0


def coverage_group(n_terminals: int, n_nodes: int) -> str:
    """``Coverage X`` with ``X - 10 < 100 |R|/|V| <= X``."""
    if n_nodes <= 0 or n_terminals <= 0:
        raise ValueError("need positive node and terminal counts")
    x = 10 * -(-10 * n_terminals // n_nodes)
    return f"Coverage {min(max(x, 10), 100)}"


RECORD_FIELDS = ["instance", "algo", "flags", "k", "cost", "gap_permil", "time_s", "status"]


@dataclass
class RunRecord:
    instance: str
    algo: str
    flags: str
    k: int
    cost: float | None
    time_s: float
    status: str = "success"
    gap_permil: float | None = None

    def __post_init__(self):
        if self.status not in ("success", "timeout", "memlimit", "error"):
            raise ValueError(f"unknown status {self.status!r}")
        if (self.cost is not None) != (self.status == "success"):
            raise ValueError("cost must be present exactly when status is success")

    def row(self) -> dict:
        def num(x):
            return "" if x is None else (_fmt_cost(x) if isinstance(x, float) else x)

        return {
            "instance": self.instance,
            "algo": self.algo,
            "flags": self.flags,
            "k": self.k,
            "cost": num(self.cost),
            "gap_permil": "" if self.gap_permil is None else f"{self.gap_permil:.6f}",
            "time_s": f"{self.time_s:.6f}",
            "status": self.status,
        }


def write_records(records: Iterable[RunRecord], fh, header: bool = True) -> None:
    writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS)
    if header:
        writer.writeheader()
    for rec in records:
        writer.writerow(rec.row())


def read_records(source: str | Path | io.TextIOBase) -> list[RunRecord]:
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_records(fh)
    reader = csv.DictReader(source)
    if reader.fieldnames is None or list(reader.fieldnames) != RECORD_FIELDS:
        raise ValueError(f"malformed run-record CSV header: {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(
            RunRecord(
                instance=row["instance"],
                algo=row["algo"],
                flags=row["flags"],
                k=int(row["k"]),
                cost=float(row["cost"]) if row["cost"] else None,
                time_s=float(row["time_s"]),
                status=row["status"],
                gap_permil=float(row["gap_permil"]) if row["gap_permil"] else None,
            )
        )
    return out
