"""Command line behavior: exit codes, artifacts, determinism."""
import csv
import json

import pytest

from posgraph import scenario_from_json
from posgraph.cli import EXIT_INPUT, EXIT_NO_PATH, EXIT_OK, main, run_benchmark
from posgraph.scenarios import builtin_scenario


def small_scenario_file(tmp_path, **extra):
    data = {
        "name": "mini",
        "bounds": {"x": [0, 6], "y": [0, 4]},
        "obstacles": [{"x": [2.8, 3.2], "y": [0, 3], "z": [0, 2.2]}],
        "gaps": [],
        "start": {"x": 1, "y": 2},
        "goals": [{"x": 5, "y": 2}],
        "actions": ["walk"],
    }
    data.update(extra)
    p = tmp_path / "mini.json"
    p.write_text(json.dumps(data))
    return p


def solve_args(path, *more):
    return [
        "solve", "--scenario", str(path), "--seed", "0",
        "--workers", "1", "--time-limit", "30", *more,
    ]


def test_solve_builtin_exits_zero(capsys):
    rc = main(["solve", "--builtin", "three_routes_a", "--actions", "walk",
               "--workers", "1", "--time-limit", "30"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "three_routes_a: solved" in out
    assert "walk:" in out


def test_solve_writes_artifacts(tmp_path, capsys):
    scn = small_scenario_file(tmp_path)
    out = tmp_path / "path.json"
    dump = tmp_path / "graph.txt"
    log = tmp_path / "events.log"
    svg = tmp_path / "world.svg"
    rc = main(solve_args(scn, "--out", str(out), "--dump", str(dump),
                         "--log", str(log), "--svg", str(svg)))
    assert rc == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["scenario"] == "mini"
    assert payload["seed"] == 0
    assert payload["cost"] > 4.0
    for e in payload["edges"]:
        assert e["action"] == "walk"
        assert e["status"] in ("sufficient-confirmed", "job-confirmed")
        assert set(e) >= {"action", "status", "cost", "from", "to"}
    dump_text = dump.read_text()
    assert dump_text.startswith("V 0 walk")
    assert "\nE " in dump_text
    log_text = log.read_text()
    assert log_text.startswith("CYCLE 1")
    assert "GROW walk" in log_text
    svg_text = svg.read_text()
    assert svg_text.startswith("<?xml") and svg_text.rstrip().endswith("</svg>")


def test_solve_deterministic_artifacts_across_runs(tmp_path):
    scn = small_scenario_file(tmp_path)
    blobs = []
    for run in range(2):
        out = tmp_path / f"p{run}.json"
        dump = tmp_path / f"g{run}.txt"
        rc = main(solve_args(scn, "--out", str(out), "--dump", str(dump)))
        assert rc == EXIT_OK
        blobs.append((out.read_bytes(), dump.read_bytes()))
    assert blobs[0] == blobs[1]


def test_solve_timeout_exits_two(tmp_path, capsys):
    # goal walled off entirely: only timeout can end the search
    scn = small_scenario_file(
        tmp_path,
        obstacles=[{"x": [2.8, 3.2], "y": [0, 4], "z": [0, 2.2]}],
    )
    rc = main(["solve", "--scenario", str(scn), "--workers", "1", "--time-limit", "2"])
    assert rc == EXIT_NO_PATH
    assert "no path found within 2.0s" in capsys.readouterr().out


def test_bad_inputs_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    cases = [
        ["solve", "--scenario", str(bad)],
        ["solve", "--scenario", str(tmp_path / "missing.json")],
        ["solve", "--builtin", "three_routes_a", "--actions", "walk,fly"],
        ["solve", "--builtin", "three_routes_a", "--actions", " , "],
        ["show", "--scenario", str(bad)],
    ]
    for argv in cases:
        assert main(argv) == EXIT_INPUT, argv
        assert "error:" in capsys.readouterr().err


def test_show_round_trips(tmp_path, capsys):
    rc = main(["show", "--builtin", "hallway"])
    assert rc == EXIT_OK
    text = capsys.readouterr().out
    sc = scenario_from_json(text)
    assert sc == builtin_scenario("hallway")


def test_render_writes_svg(tmp_path, capsys):
    out = tmp_path / "w.svg"
    rc = main(["render", "--builtin", "double_jump", "--out", str(out)])
    assert rc == EXIT_OK
    text = out.read_text()
    assert text.startswith("<?xml")
    assert text.count("<rect") > 3  # floor, wall, gaps


def test_bench_table_and_csv(tmp_path, capsys):
    scn = small_scenario_file(tmp_path)
    csv_path = tmp_path / "runs.csv"
    argv = [
        "bench", "--scenario", str(scn), "--trials", "3", "--seed", "7",
        "--workers", "1", "--time-limit", "30", "--csv", str(csv_path),
    ]
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out
    assert "scenario" in out and "success" in out
    assert "mini" in out and "100.0%" in out
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["scenario", "actions", "trial", "seed", "solved", "elapsed", "cost"]
    assert len(rows) == 4
    assert [r[3] for r in rows[1:]] == ["7", "8", "9"]
    assert all(r[4] == "1" for r in rows[1:])
    # appending keeps one header
    assert main(argv) == EXIT_OK
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 7
    assert sum(1 for r in rows if r[0] == "scenario") == 1


def test_run_benchmark_keep_edges_snapshots():
    sc = builtin_scenario("three_routes_a")
    res = run_benchmark(sc, trials=2, base_seed=0, time_limit=30.0, workers=1, keep_edges=True)
    assert res.successes == 2
    for r in res.records:
        assert r.tags and len(r.edges) == len(r.tags)
        for snap, status in r.edges:
            assert status in ("sufficient-confirmed", "job-confirmed")
            assert snap.tag == r.tags[r.edges.index((snap, status))]


def test_missing_required_args_exit_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2  # argparse usage failure, distinct from our codes
