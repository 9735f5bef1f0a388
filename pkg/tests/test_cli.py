import json
import subprocess
import sys

import pytest

from somepairs.cli import main
from somepairs.graph import load_edge_list
from somepairs.schema import MappingSchema


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_hd1(tmp_path, capsys):
    path = tmp_path / "g.tsv"
    code, out, _ = run_cli(capsys, "gen", "hd1", "--b", "3", "-o", str(path))
    assert code == 0 and "m=24" in out
    assert load_edge_list(path).m == 24


def test_gen_random_distinct(tmp_path, capsys):
    path = tmp_path / "r.tsv"
    code, _, _ = run_cli(capsys, "gen", "random", "--n", "16", "--m", "32", "--distinct",
                         "--seed", "1", "-o", str(path))
    assert code == 0
    body = [l for l in path.read_text().splitlines()[1:] if not l.startswith("#")]
    assert len(body) == 32 == len(set(body))


def test_gen_usage_errors(capsys):
    assert run_cli(capsys, "gen", "hd1", "--b", "0")[0] == 2
    assert run_cli(capsys, "gen", "hd1")[0] == 2
    assert run_cli(capsys, "gen", "random", "--n", "2", "--m", "9", "--distinct")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["gen", "nosuch"])
    assert exc.value.code == 2


def test_gen_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    for p in (a, b):
        run_cli(capsys, "gen", "random", "--n", "12", "--m", "40", "--seed", "9", "-o", str(p))
    assert a.read_bytes() == b.read_bytes()


def test_plan_a_prints_rate(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "plan", "a", "--gen", "hd1:b=3", "--q", "2",
                           "-o", str(tmp_path / "s.json"))
    assert code == 0
    assert "rate: 4 (= n/q)" in out and "p: 16" in out and "complete: true" in out
    assert MappingSchema.load(tmp_path / "s.json").p == 16


def test_plan_prefix(capsys):
    code, out, err = run_cli(capsys, "plan", "prefix", "--gen", "hd1_up:b=4", "--q", "4")
    assert code == 0
    assert json.loads(out)["provenance"] == "prefix"
    assert "rate_exact: 2/1" in err and "participating_rate: 31/15" in err


def test_plan_prefix_incompatible(capsys):
    code, _, err = run_cli(capsys, "plan", "prefix", "--gen", "hd1:b=3", "--q", "2")
    assert code == 3 and "up-only" in err


def test_plan_weight_on_plain_hd1_runs_with_note(capsys):
    code, out, err = run_cli(capsys, "plan", "c", "--strategy", "weight", "--gen", "hd1:b=3",
                             "--q", "2")
    assert code == 0 and "up-only" in err and json.loads(out)["provenance"] == "c:weight"


def test_plan_weight_needs_labels(capsys):
    code, _, _ = run_cli(capsys, "plan", "c", "--strategy", "weight",
                         "--gen", "random:n=8,m=10", "--q", "2")
    assert code == 3


def test_plan_complete_flag(capsys):
    code, out, err = run_cli(capsys, "plan", "c", "--gen", "random:n=12,m=30,seed=2",
                             "--q", "2", "--complete")
    assert code == 0 and "complete: true" in err
    assert json.loads(out)["provenance"] == "c:halve+complete"


def test_validate_strict(tmp_path, capsys):
    s = tmp_path / "s.json"
    s.write_text('{"q":1,"provenance":"","reducers":[{"x":[0],"y":[1]}]}\n')
    code, out, _ = run_cli(capsys, "validate", "--gen", "hd1:b=2", "--schema", str(s))
    assert code == 0 and json.loads(out)["ok"] is False
    code, _, _ = run_cli(capsys, "validate", "--gen", "hd1:b=2", "--schema", str(s), "--strict")
    assert code == 5


def test_analyze_examples(tmp_path, capsys):
    s = tmp_path / "b.json"
    run_cli(capsys, "plan", "b", "--gen", "hd1:b=3", "-o", str(s))
    code, out, _ = run_cli(capsys, "analyze", "--gen", "hd1:b=3", "--q", "2", "--schema", str(s))
    body = json.loads(out)
    assert code == 0
    assert body["schema"]["rate"] == "3/1" and body["bounds"]["upper_b"] == "3/1"

    a = tmp_path / "a.json"
    run_cli(capsys, "plan", "a", "--gen", "complete:n=4", "--q", "2", "-o", str(a))
    body = json.loads(run_cli(capsys, "analyze", "--gen", "complete:n=4", "--schema", str(a))[1])
    assert body["schema"]["rate"] == "2/1" and body["bounds"]["upper_a"] == "2/1"
    assert body["schema"]["reducer_floor"]["holds"] is True

    c = tmp_path / "c.json"
    run_cli(capsys, "plan", "c", "--gen", "random:n=16,m=64", "--q", "2", "-o", str(c))
    body = json.loads(run_cli(capsys, "analyze", "--gen", "random:n=16,m=64", "--schema", str(c))[1])
    assert body["schema"]["rate_le_2sqrt_mq"] is True


def test_analyze_budget_skip(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOMEPAIRS_BUDGET", "10")
    s = tmp_path / "a.json"
    run_cli(capsys, "plan", "a", "--gen", "hd1:b=3", "--q", "2", "-o", str(s))
    body = json.loads(run_cli(capsys, "analyze", "--gen", "hd1:b=3", "--schema", str(s))[1])
    assert body["schema"]["reducer_floor"].startswith("skipped (budget)")


def test_expansion(tmp_path, capsys):
    tsv = tmp_path / "e.tsv"
    code, out, _ = run_cli(capsys, "expansion", "--n", "16", "--m", "128", "--q", "2",
                           "--trials", "20", "--tsv", str(tsv))
    body = json.loads(out)
    assert code == 0 and body["case"] == "case1" and len(body["trials"]) == 20
    assert len(tsv.read_text().splitlines()) == 21


def test_expansion_budget_exit(capsys, monkeypatch):
    monkeypatch.setenv("SOMEPAIRS_BUDGET", "100")
    assert run_cli(capsys, "expansion", "--n", "16", "--m", "64", "--q", "4", "--trials", "1")[0] == 4


def test_run_all_present(tmp_path, capsys):
    s = tmp_path / "s.json"
    run_cli(capsys, "plan", "c", "--gen", "hd1:b=3", "--q", "2", "-o", str(s))
    code, out, _ = run_cli(capsys, "run", "--gen", "hd1:b=3", "--schema", str(s))
    body = json.loads(out)
    assert code == 0 and body["emitted"] == 24 and body["correct"]
    code, out, _ = run_cli(capsys, "run", "--gen", "hd1:b=3", "--schema", str(s),
                           "--presence", "half", "--mode", "predicate")
    assert json.loads(out)["correct"]


def test_run_refuses_invalid(tmp_path, capsys):
    s = tmp_path / "s.json"
    s.write_text('{"q":1,"provenance":"","reducers":[]}\n')
    assert run_cli(capsys, "run", "--gen", "hd1:b=2", "--schema", str(s))[0] == 5


def test_bench_hd1_up(capsys):
    code, out, _ = run_cli(capsys, "bench", "--gen", "hd1_up:b=4", "--qs", "2,4,8,16")
    assert code == 0
    lines = out.splitlines()
    header = lines[0].split("\t")
    rows = [dict(zip(header, l.split("\t"))) for l in lines[1:]]
    rate = {(r["planner"], int(r["q"])): float(r["rate_decimal"]) for r in rows if r["status"] == "ok"}
    assert rate[("prefix", 8)] < min(rate[("a", 8)], rate[("b", 8)])
    assert rate[("prefix", 4)] <= min(rate[("a", 4)], rate[("b", 4)])
    assert all(r["valid"] == "true" for r in rows if r["status"] == "ok")


def test_bench_reports_incompatible_cells(capsys):
    code, out, _ = run_cli(capsys, "bench", "--gen", "hd1_up:b=3", "--qs", "3,4")
    assert code == 0
    assert any(l.startswith("prefix\t3\terror") for l in out.splitlines())


def test_bench_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    for p in (a, b):
        run_cli(capsys, "bench", "--gen", "random:n=16,m=40", "--seed", "3", "-o", str(p))
    assert a.read_bytes() == b.read_bytes()


def test_bad_graph_file(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("2\t2\n0\t5\n")
    code, _, err = run_cli(capsys, "plan", "b", "--graph", str(bad))
    assert code == 2 and "line 2" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "somepairs", "gen", "hd1", "--b", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 2
