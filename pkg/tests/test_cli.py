import csv
import io
import json

import pytest
from click.testing import CliRunner

from hybridcoat.cli import main
from hybridcoat.scenario import Scenario


def scenario(tmp_path, name="s.json", **data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def gen(kind, size, seed=0):
    return {"generator": {"kind": kind, "size": size, "seed": seed}}


@pytest.fixture
def cli():
    return CliRunner()


def test_inspect_single_node(cli, tmp_path):
    res = cli.invoke(main, ["inspect", "--json", scenario(tmp_path, object=[[0, 0, 0]])])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["theta"] == 1 and rep["n"] == 12
    assert rep["smooth"] and rep["coatable"]
    assert rep["recommended_mode"] == "direct"
    assert rep["genus"] == 0


def test_inspect_text_report(cli, tmp_path):
    res = cli.invoke(main, ["inspect", scenario(tmp_path, object=gen("notched_slab", 1))])
    assert res.exit_code == 0, res.output
    assert "smooth: no" in res.output
    assert "recommended mode: emulated" in res.output


@pytest.mark.parametrize(
    "data",
    [
        {"object": []},
        {"object": [[0, 0, 1]]},
        {"object": [[0, 0, 0]], "mode": "sideways"},
        {"object": [[0, 0, 0]], "fixture": "octahedron"},
        {"object": [[0, 0, 0]], "p0": [5, 5, 0]},
        {"object": gen("nope", 3)},
        {"fixture": "cube"},
        {"object": [[0, 0, 0]], "colour": "red"},
        {"object": gen("notched_slab", 1), "mode": "direct"},
    ],
)
def test_invalid_scenarios_exit_2(cli, tmp_path, data):
    res = cli.invoke(main, ["coat", scenario(tmp_path, **data)])
    assert res.exit_code == 2, res.output
    err = json.loads(res.stderr.strip().splitlines()[-1])
    assert err["status"] == "invalid" and err["error"]


def test_malformed_json_reports_position(cli, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"object": [[0, 0, 0]\n')
    res = cli.invoke(main, ["inspect", str(path)])
    assert res.exit_code == 2
    assert "line 2" in res.stderr


def test_missing_file_exits_2(cli, tmp_path):
    res = cli.invoke(main, ["coat", str(tmp_path / "missing.json")])
    assert res.exit_code == 2


def test_coat_ball_with_monitors(cli, tmp_path):
    path = scenario(tmp_path, object=gen("ball", 2), monitors={"invariants": True})
    summary = tmp_path / "summary.json"
    trace = tmp_path / "trace.txt"
    snaps = tmp_path / "frames.jsonl"
    res = cli.invoke(
        main, ["coat", path, "--summary", str(summary), "--trace", str(trace), "--snapshots", str(snaps)]
    )
    assert res.exit_code == 0, res.output
    doc = json.loads(summary.read_text())
    assert doc["status"] == "ok" and doc["complete"] and doc["type_changes"] == 0
    assert doc["invariant_checks"] > 0
    lines = trace.read_text().splitlines()
    assert lines[0].startswith("1 ")
    assert not any(" remove " in line for line in lines)
    frames = [json.loads(x) for x in snaps.read_text().splitlines()]
    assert len(frames) == doc["placements"] + 1
    n = len(frames[0]["tiled"]) + len(frames[0]["empty"]) + 1
    for f in frames:
        assert len(f["tiled"]) + len(f["empty"]) + 1 == n
        assert not (set(f["tiled"]) & set(f["empty"]))
        assert f["agent"] not in f["tiled"] and f["agent"] not in f["empty"]
    assert not frames[-1]["empty"]


def test_every_step_snapshots(cli, tmp_path):
    path = scenario(tmp_path, fixture="octahedron")
    snaps = tmp_path / "frames.jsonl"
    res = cli.invoke(main, ["coat", path, "--every-step", "--snapshots", str(snaps), "--count-probes", "false"])
    assert res.exit_code == 0, res.output
    frames = snaps.read_text().splitlines()
    assert len(frames) == int(res.output.split(" steps")[0].split()[-1]) + 1


def test_step_limit_exits_3_without_artifacts(cli, tmp_path):
    path = scenario(tmp_path, object=gen("ball", 2))
    trace = tmp_path / "trace.txt"
    res = cli.invoke(main, ["coat", path, "--max-steps", "10", "--trace", str(trace)])
    assert res.exit_code == 3
    doc = json.loads(res.stderr.strip().splitlines()[-1])
    assert doc["failure"]["check"] == "step limit exceeded"
    tail = doc["failure"]["trace_tail"]
    assert tail and max(int(line.split()[0]) for line in tail) == 10
    assert not trace.exists()


def test_not_coatable_start_exits_3(cli, tmp_path):
    # tiling two opposite octahedron corners around the depot leaves links
    path = scenario(tmp_path, fixture="octahedron", p0=0, tiled=[1])
    res = cli.invoke(main, ["coat", path])
    assert res.exit_code == 3
    assert json.loads(res.stderr.strip().splitlines()[-1])["failure"]["check"] == "coatability"


def test_octahedron_emulated(cli, tmp_path):
    path = scenario(tmp_path, fixture="octahedron", mode="emulated")
    summary = tmp_path / "summary.json"
    res = cli.invoke(main, ["coat", path, "--summary", str(summary)])
    assert res.exit_code == 0, res.output
    doc = json.loads(summary.read_text())
    assert doc["mode"] == "emulated" and doc["consistent"]
    assert doc["type_changes"] == 27 and doc["codes_used"] == 23


def test_emulated_snapshots_carry_codes(cli, tmp_path):
    path = scenario(tmp_path, fixture="tetrahedron", mode="emulated")
    snaps = tmp_path / "frames.jsonl"
    res = cli.invoke(main, ["coat", path, "--snapshots", str(snaps)])
    assert res.exit_code == 0, res.output
    last = json.loads(snaps.read_text().splitlines()[-1])
    assert set(last["codes"]) == {"0", "1", "2", "3"}
    assert all("1" in c for c in last["codes"].values())
    assert not last["virtual"]["empty"]


def test_coat_is_deterministic(cli, tmp_path):
    path = scenario(tmp_path, object=gen("line", 6))
    outs = []
    for i in range(2):
        trace = tmp_path / f"t{i}.txt"
        assert cli.invoke(main, ["coat", path, "--trace", str(trace)]).exit_code == 0
        outs.append(trace.read_bytes())
    assert outs[0] == outs[1]


def test_bench_rows_and_reproducibility(cli, tmp_path):
    out = tmp_path / "bench.csv"
    args = ["bench", "--kind", "line", "--sizes", "4,8,16", "-o", str(out)]
    res = cli.invoke(main, args)
    assert res.exit_code == 0, res.output
    first = out.read_bytes()
    rows = list(csv.DictReader(io.StringIO(first.decode())))
    assert [int(r["size"]) for r in rows] == [4, 8, 16]
    ns = [int(r["n"]) for r in rows]
    steps = [int(r["total_steps"]) for r in rows]
    assert ns == sorted(ns) and steps == sorted(steps)
    assert all(r["status"] == "ok" and r["complete"] == "True" for r in rows)
    assert "band" in res.stderr
    assert cli.invoke(main, args).exit_code == 0
    assert out.read_bytes() == first
    assert cli.invoke(main, args + ["--jobs", "2"]).exit_code == 0
    assert out.read_bytes() == first


def test_bench_timing_column(cli):
    res = cli.invoke(main, ["bench", "--sizes", "2", "--timing"])
    assert res.exit_code == 0
    assert res.stdout.splitlines()[0].endswith(",wall_time_s")


def test_bench_rejects_unsorted_sizes(cli):
    assert cli.invoke(main, ["bench", "--sizes", "8,4"]).exit_code == 2


def test_verify_zero_budget(cli, tmp_path):
    report = tmp_path / "r.json"
    res = cli.invoke(main, ["verify", "--budget", "0", "--report", str(report)])
    assert res.exit_code == 0
    assert "oracles: 0 samples" in res.output
    doc = json.loads(report.read_text())
    assert doc["ok"] and [s["samples"] for s in doc["suites"]] == [0, 0, 0]


def test_verify_small_budget(cli):
    res = cli.invoke(main, ["verify", "--suite", "oracles", "--budget", "20"])
    assert res.exit_code == 0, res.output
    assert res.output.startswith("oracles: PASS")


def test_scenario_defaults():
    sc = Scenario.from_dict({"object": [[0, 0, 0]]})
    assert sc.p0 == "auto" and sc.mode == "auto" and sc.count_probes and not sc.check_invariants
