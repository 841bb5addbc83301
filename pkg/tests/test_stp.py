import io
import warnings
from pathlib import Path

import pytest

from steinapprox.stp import (
    RunRecord,
    StpFormatError,
    coverage_group,
    gap_permil,
    parse_stp,
    read_bounds,
    read_records,
    read_stp,
    write_records,
    write_stp,
)

FIXTURES = sorted((Path(__file__).parent / "fixtures").glob("*.stp"))


def stp(body, header="33D32945 STP File, STP Format Version 1.0"):
    return f"{header}\n{body}\nEOF\n"


GRAPH = "SECTION Graph\nNodes 3\nEdges 2\nE 1 2 1\nE 2 3 1\nEND\n"


def test_minimal_path_file():
    inst = parse_stp(stp(GRAPH + "SECTION Terminals\nTerminals 2\nT 1\nT 3\nEND"))
    assert (inst.n, len(inst.edges), inst.terminals) == (3, 2, (0, 2))


def test_duplicate_edges_collapse_to_min():
    body = "SECTION Graph\nNodes 2\nEdges 2\nE 1 2 5\nE 1 2 3\nEND\nSECTION Terminals\nT 1\nT 2\nEND"
    inst = parse_stp(stp(body))
    assert inst.edges == ((0, 1, 3.0),)


@pytest.mark.parametrize(
    "text",
    [
        stp(GRAPH + "SECTION Terminals\nT 1\nT 5\nEND"),
        stp(GRAPH + "SECTION Terminals\nTerminals 0\nEND"),
        stp("SECTION Graph\nNodes 2\nE 1 2 x\nEND\nSECTION Terminals\nT 1\nT 2\nEND"),
        stp("SECTION Graph\nNodes 2\nA 1 2 1\nEND\nSECTION Terminals\nT 1\nT 2\nEND"),
        stp(GRAPH + "SECTION Terminals\nT 1\nT 3\nEND", header="garbage"),
        "33D32945\n" + GRAPH + "SECTION Terminals\nT 1\nT 3\nEND\n",
        stp("SECTION Graph\nNodes 3\nEdges 3\nE 1 2 1\nE 2 3 1\nEND\nSECTION Terminals\nT 1\nT 3\nEND"),
        stp("SECTION Graph\nNodes 2\nE 1 2 -4\nEND\nSECTION Terminals\nT 1\nT 2\nEND"),
    ],
)
def test_malformed_files(text):
    with pytest.raises(StpFormatError):
        parse_stp(text)


def test_comments_and_unknown_sections_skipped():
    body = "SECTION Presolve\nFixed 3\nEND\n# note\n" + GRAPH + "SECTION Terminals\nT 1 # first\nT 3\nEND"
    assert parse_stp(stp(body)).terminals == (0, 2)


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_fixture_round_trip(path):
    text = path.read_text()
    a = parse_stp(text)
    b = parse_stp(write_stp(a))
    assert (a.n, sorted(a.edges), a.terminals) == (b.n, sorted(b.edges), b.terminals)
    assert read_stp(path).name == path.stem


def test_gap_values():
    assert round(gap_permil(6_001_175, 6_001_164), 4) == 0.0018
    assert round(gap_permil(11_600_427, 6_001_164), 2) == 933.03
    assert gap_permil(7, 7) == 0.0
    with pytest.warns(RuntimeWarning):
        assert gap_permil(9, 10) == pytest.approx(-100.0)
    with pytest.raises(ValueError):
        gap_permil(1, 0)


@pytest.mark.parametrize(
    "r,v,label",
    [(2, 40, "Coverage 10"), (10, 10, "Coverage 100"), (25, 100, "Coverage 30"), (26, 100, "Coverage 30"), (1, 100, "Coverage 10")],
)
def test_coverage_group(r, v, label):
    assert coverage_group(r, v) == label


def test_bounds_table():
    b = read_bounds("# name value\nb01 82\nb02  83.5\n\n")
    assert b == {"b01": 82.0, "b02": 83.5}
    with pytest.raises(ValueError):
        read_bounds("b01 0")


def test_records_round_trip():
    recs = [
        RunRecord("b01", "tm", "", 0, 82.0, 0.01, gap_permil=0.0),
        RunRecord("b02", "gcf", "win=abs gen=voronoi", 3, None, 60.0, status="timeout"),
    ]
    buf = io.StringIO()
    write_records(recs, buf)
    buf.seek(0)
    back = read_records(buf)
    assert [(r.instance, r.cost, r.status, r.k) for r in back] == [("b01", 82.0, "success", 0), ("b02", None, "timeout", 3)]
    with pytest.raises(ValueError):
        RunRecord("x", "tm", "", 0, None, 1.0)
    with pytest.raises(ValueError):
        read_records(io.StringIO("a,b\n1,2\n"))
