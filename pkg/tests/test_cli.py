import csv
import json

import pytest
from hypothesis import given, settings, strategies as st

from avoidlab import io as tio
from avoidlab.cli import main
from avoidlab.learning import RunConfig, run
from avoidlab.oracle import has_strategy
from avoidlab.randtask import RandomTaskParams, gen_random_task, sample_params
from avoidlab.task import validate_task
from avoidlab.worked import BUILTINS


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtin_export_validate(tmp_path, name, capsys):
    path = tmp_path / "t.json"
    assert main(["export", name, "-o", str(path)]) == 0
    assert main(["validate", str(path)]) == 0


def test_validate_dangling_successor(tmp_path, capsys):
    doc = tio.task_to_json(BUILTINS["example1"]())
    doc["transition"][0]["successors"] = ["9"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == 1
    out = capsys.readouterr().out
    assert "dangling-successor" in out and "1 violation(s)" in out


def test_validate_parse_failures(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"states": [\n  "1",\n')
    assert main(["validate", str(path)]) == 2
    assert "line" in capsys.readouterr().err
    doc = tio.task_to_json(BUILTINS["example1"]())
    doc["extra"] = 1
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 3


def test_round_trip_is_byte_identical():
    for seed in range(30):
        text = tio.dumps_task(gen_random_task(sample_params(seed)))
        assert tio.dumps_task(tio.loads_task(text)) == text


def test_oracle_output(capsys):
    assert main(["oracle", "example1"]) == 0
    out = capsys.readouterr().out
    assert "start 1: NO strategy" in out and "start 2: strategy exists" in out
    assert "  f -> {}" in out and "  g -> {a}" in out
    assert main(["oracle", "fig2b"]) == 0
    assert "  f1 -> {a}\n" in capsys.readouterr().out
    assert main(["oracle", "fig5-reconstruction"]) == 0
    assert "start 1: NO strategy" in capsys.readouterr().out
    assert main(["oracle", "example1", "--start", "7"]) == 1


def test_learn_example1(tmp_path, capsys):
    out = tmp_path / "runs"
    assert main(["learn", "example1", "--repetitions", "5", "--out", str(out), "--seed", "10"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert [r["final_p"] for r in summary["runs"]] == [[["g", "a"]]] * 5
    for r in summary["runs"]:
        rows = list(csv.DictReader(open(out / f"trace_seed{r['seed']}.csv")))
        removals = [row for row in rows if row["event"].startswith("Removal")]
        assert len(removals) == r["removal_events"]
        removed_total = sum(len(json.loads(row["removed_pairs"])) for row in removals)
        assert r["final_p_size"] == 2 - removed_total
        assert r["post_settle_signals"] == 0


def test_learn_spec_file_and_determinism(tmp_path, capsys):
    spec = {"task": "example1", "config": {"max_steps": 300}, "repetitions": 2}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    for d in ("a", "b"):
        assert main(["learn", str(path), "--out", str(tmp_path / d)]) == 0
    for seed in (0, 1):
        a = (tmp_path / "a" / f"trace_seed{seed}.csv").read_bytes()
        b = (tmp_path / "b" / f"trace_seed{seed}.csv").read_bytes()
        assert a == b
        assert a.startswith(b"step,trial,event,state,action,successor,signal,removed_pairs,P_size\n")
        assert b"\r" not in a


def test_learn_seed_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("AVOIDLAB_SEED", "42")
    assert main(["learn", "fig2b", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "trace_seed42.csv").exists()


def test_learn_fig5_presets(tmp_path, capsys):
    assert main(["learn", "fig5-reconstruction", "--out", str(tmp_path / "a")]) == 0
    kept = json.loads((tmp_path / "a" / "summary.json").read_text())["runs"][0]
    assert ["f", "a"] in kept["final_p"]
    assert main(["learn", "fig5-reconstruction", "--restart-delay", "2", "--out", str(tmp_path / "b")]) == 0
    lost = json.loads((tmp_path / "b" / "summary.json").read_text())["runs"][0]
    assert ["f", "a"] not in lost["final_p"]


def test_learn_resume(tmp_path, capsys):
    snap = tmp_path / "snap.tsv"
    snap.write_text(tio.dumps_snapshot({("f", "a")}))
    assert main(["learn", "example1", "--resume", str(snap), "--out", str(tmp_path / "r")]) == 0
    run0 = json.loads((tmp_path / "r" / "summary.json").read_text())["runs"][0]
    assert run0["removal_events"] == 0
    assert tio.loads_snapshot((tmp_path / "r" / "removed_seed0.tsv").read_text()) == {("f", "a")}


def test_learn_io_failure(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["learn", "example1", "--out", str(blocker / "sub")]) == 3


def test_grid_command(tmp_path, capsys):
    prob = tmp_path / "p.json"
    prob.write_text(json.dumps({"width": 2, "height": 2, "starts": [[0, 0]], "targets": [[2, 2]], "tau": 5}))
    out = tmp_path / "task.json"
    assert main(["grid", str(prob), "-o", str(out)]) == 0
    assert validate_task(tio.load_task(out)) == []
    prob.write_text(json.dumps({"width": 2, "height": 2, "starts": [[0, 0]], "targets": [[2, 2]], "tau": 4}))
    assert main(["grid", str(prob), "-o", str(out)]) == 1


def test_qsim_csv(tmp_path, capsys):
    out = tmp_path / "q.csv"
    assert main(["qsim", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "step,q_1a,q_1b,reward,action,phase"
    assert len(lines) == 40001
    assert main(["qsim", "--alpha", "0"]) == 1
    assert main(["qsim", "--n", "500", "--steps", "400", "-o", str(out)]) == 0
    from avoidlab.qbaseline import sign_changes
    q1b = [float(r["q_1b"]) for r in csv.DictReader(open(out))]
    assert sign_changes(q1b) == 0


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["gen", "--seed", "7", "-o", str(a)]) == 0
    assert main(["gen", "--seed", "7", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["gen", "--states", "20"]) == 1


def test_gen_200_seeds_validate():
    for seed in range(200):
        assert validate_task(gen_random_task(sample_params(seed))) == []


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(1, 3), st.integers(1, 4))
def test_no_aversion_means_strategy_everywhere(seed, n, a, f):
    task = gen_random_task(RandomTaskParams(seed=seed, states=n, actions=a, features=f,
                                            aversive_density=0.0, empty_density=0.0))
    for s0 in task.starts:
        assert has_strategy(task, s0)


def test_snapshot_round_trip():
    removed = {("f", "a"), ("-1,0;3", "left")}
    assert tio.loads_snapshot(tio.dumps_snapshot(removed)) == removed
    with pytest.raises(ValueError):
        tio.loads_snapshot("only-one-column\n")


def test_trace_csv_rows():
    import io
    res = run(BUILTINS["fig2b"](), RunConfig(max_steps=20))
    buf = io.StringIO()
    tio.write_trace_csv(res.trace, buf)
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert len(rows) == len(res.trace)
    assert {r["event"].split(":")[0] for r in rows} >= {"TrialStart", "Step", "Removal"}
