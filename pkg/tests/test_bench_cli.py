import csv
import io
from pathlib import Path

import pytest

from helpers import random_instance
from steinapprox import write_stp
from steinapprox.__main__ import main
from steinapprox.bench import (
    InstanceInfo,
    RunSpec,
    is_large,
    load_groups,
    instance_group,
    report,
    rho_k,
    run,
    run_instance,
    scan_header,
)
from steinapprox.stp import RunRecord, read_records

FIXTURES = Path(__file__).parent / "fixtures"


def test_tm_on_path():
    rec = run_instance(RunSpec("tm"), FIXTURES / "path3.stp", {"path3": 2})
    assert rec.status == "success" and rec.cost == 2 and rec.gap_permil == 0


def test_gcf_voronoi_on_star():
    rec = run_instance(RunSpec("gcf", win="abs", k=3, gen="voronoi"), FIXTURES / "star.stp")
    assert rec.status == "success" and rec.cost == 3


@pytest.mark.parametrize("algo", ["tm", "kmb", "gcf", "lca", "lp", "exact"])
def test_zero_budget_times_out(algo):
    rec = run_instance(RunSpec(algo, time=0.0, seed=0), FIXTURES / "rand1.stp")
    assert rec.status == "timeout" and rec.cost is None


def test_memory_guard():
    rec = run_instance(RunSpec("exact", memory=1.0), FIXTURES / "rand1.stp")
    assert rec.status == "memlimit"


def test_failures_do_not_abort_batch(tmp_path):
    (tmp_path / "bad.stp").write_text("33D32945 STP File\nSECTION Graph\nNodes x\nEND\nEOF\n")
    (tmp_path / "path3.stp").write_text((FIXTURES / "path3.stp").read_text())
    recs = run([RunSpec("tm")], [tmp_path])
    assert sorted((r.instance, r.status) for r in recs) == [("bad", "error"), ("path3", "success")]


def test_parallel_matches_serial():
    specs = [RunSpec("gcf"), RunSpec("tm")]
    a = run(specs, [FIXTURES], workers=1)
    b = run(specs, [FIXTURES], workers=2)
    assert [(r.instance, r.algo, r.cost) for r in a] == [(r.instance, r.algo, r.cost) for r in b]


def test_seeded_runs_reproduce(rng):
    inst = random_instance(rng, n=10, r=6)
    for algo in ("lp", "gcf"):
        spec = RunSpec(algo, seed=7)
        a, b = run_instance(spec, inst), run_instance(spec, inst)
        assert (a.cost, a.flags, a.status) == (b.cost, b.flags, b.status)


def test_validation():
    with pytest.raises(ValueError):
        RunSpec("gcf", gen="ondemand", win="rel").validate()
    with pytest.raises(ValueError):
        RunSpec("gcf", gen="ondemand", k=4).validate()
    with pytest.raises(ValueError):
        RunSpec("lp", gen="ondemand").validate()
    with pytest.raises(ValueError):
        RunSpec("bogus").validate()
    with pytest.raises(ValueError):
        RunSpec("gcf", k=4, dist="sssp").validate()
    assert RunSpec("gcf", gen="ondemand").validate() == []
    assert RunSpec("gcf", k=4, gen="voronoi").validate()


def test_flags_spelling():
    spec = RunSpec("gcf", win="rel", gen="all:smart", sp="forbid", reduce=True)
    assert spec.flags() == "dist=apsp sp=forbid gen=all:smart win=rel save=static reduce=on singlepass=off"
    assert RunSpec("tm").flags() == ""


def test_rho():
    assert rho_k(2) == 2
    assert rho_k(3) == pytest.approx(5 / 3)
    assert rho_k(4) == 1.5
    assert rho_k(5) == pytest.approx(1 + 4 / 9)
    with pytest.raises(ValueError):
        rho_k(1)


def rec(name, algo, cost, status="success", t=1.0, k=3):
    return RunRecord(name, algo, "", k, cost if status == "success" else None, t, status)


def test_report_single_record():
    tables = report([rec("a", "tm", 5)], bounds={"a": 5})
    (all_table,) = tables
    ((group, count, cells),) = all_table.rows
    assert count == 1 and cells[0][:3] == (100.0, 100.0, 0.0)


def test_report_head_to_head():
    recs = [rec("a", "tm", 11), rec("a", "gcf", 10), rec("b", "tm", 12), rec("b", "gcf", None, "timeout")]
    bounds = {"a": 10, "b": 10}
    (t,) = report(recs, bounds=bounds)
    cells = dict(zip(t.columns, t.rows[0][2]))
    assert t.rows[0][1] == 2 and cells["gcf3"][0] == 50.0
    (t,) = report(recs, bounds=bounds, head_to_head=True)
    cells = dict(zip(t.columns, t.rows[0][2]))
    assert t.rows[0][1] == 1
    assert cells["tm"][2] == pytest.approx(100.0)
    assert cells["gcf3"][2] == 0.0


def test_report_excludes_unbounded():
    with pytest.warns(RuntimeWarning):
        (t,) = report([rec("a", "tm", 5), rec("b", "tm", 6)], bounds={"a": 5})
    assert t.rows[0][1] == 1


def test_coverage_rows_partition(rng, tmp_path):
    names = []
    for i in range(12):
        inst = random_instance(rng, n=int(rng.integers(5, 30)), r=int(rng.integers(2, 6)))
        (tmp_path / f"i{i}.stp").write_text(write_stp(inst))
        names.append(f"i{i}")
    recs = run([RunSpec("tm")], [tmp_path])
    infos = {n: scan_header(tmp_path / f"{n}.stp") for n in names}
    bounds = {r.instance: r.cost for r in recs}
    tables = {t.title: t for t in report(recs, infos, bounds)}
    assert sum(count for _, count, _ in tables["Coverage"].rows) == len(names)


def test_report_is_idempotent(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--algo", "tm", "--out", str(out), str(FIXTURES)]) == 0
    assert main(["run", "--algo", "gcf", "--win", "rel", "--out", str(out), "--append", str(FIXTURES)]) == 0
    bounds = tmp_path / "b.txt"
    bounds.write_text("".join(f"{r.instance} {r.cost}\n" for r in read_records(out) if r.algo == "tm"))
    args = ["report", "--bounds", str(bounds), "--instances", str(FIXTURES), "--format", "csv", str(out)]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_text() == second.read_text()
    rows = [r for r in csv.reader(io.StringIO(first.read_text())) if r and r[0] == "All"]
    assert {r[3] for r in rows} == {"tm", "gcf3 dist=apsp sp=prefer gen=voronoi win=rel save=static reduce=off singlepass=off"}
    assert all(r[2] == "7" for r in rows)


def test_cli_run_and_rho(capsys):
    assert main(["run", "--algo", "gcf", "--win", "rel", "--k", "3", "--gen", "voronoi", "--sp", "prefer",
                 "--save", "static", "--reduce", "on", "--time", "60", "--seed", "7", str(FIXTURES / "star.stp")]) == 0
    (r,) = read_records(io.StringIO(capsys.readouterr().out))
    assert r.cost == 3 and "reduce=on" in r.flags
    assert main(["rho", "--k", "5"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(13 / 9)
    assert main(["run", "--algo", "gcf", "--gen", "ondemand", "--win", "rel", str(FIXTURES)]) == 2


def test_groups_mapping():
    rules = load_groups()
    sparse = InstanceInfo("p619", 100, 180, 10, "P6E")
    assert instance_group(sparse, rules) == "EuclidSparse"
    assert instance_group(InstanceInfo("b01", 50, 63, 9, "B"), rules) == "RandomSparse"
    assert instance_group(InstanceInfo("x", 5, 4, 2, "NOPE"), rules) is None
    assert is_large(InstanceInfo("x", 9000, 10, 2, "B"))
    assert not is_large(InstanceInfo("x", 8000, 16000, 2, "B"))
