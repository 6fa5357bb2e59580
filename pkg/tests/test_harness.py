import csv
import json

import numpy as np
import pytest

from divturbo import cli, harness, stats
from divturbo.exceptions import ConfigError, UnsupportedDim
from divturbo.harness import Cell, ExperimentConfig, RunRecord, parse_config, run_experiment

SMALL = """
[experiment]
functions = sphere
dims = 2
taus = 1.0
m = 2
repeats = 3
budget_rule = 40
algorithms = seq
base_seed = 7
"""


def test_parse_config_roundtrip():
    cfg = parse_config(SMALL + "\n[optimizer]\nn_batch = 2\n")
    assert cfg.functions == ["sphere"] and cfg.dims == [2] and cfg.taus == [1.0]
    assert (cfg.m, cfg.repeats, cfg.budget_rule, cfg.base_seed) == (2, 3, "40", 7)
    assert cfg.turbo_config().n_batch == 2


@pytest.mark.parametrize("bad", [
    SMALL + "colour = blue\n",
    SMALL + "\n[optimizer]\nwarp = 9\n",
    SMALL + "\n[plots]\nx = 1\n",
    SMALL.replace("functions = sphere", "functions = teapot"),
    SMALL.replace("algorithms = seq", "algorithms = seq, annealing"),
    SMALL.replace("budget_rule = 40", "budget_rule = lots"),
    "[experiment]\ndims = 2\ntaus = 1\n",
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_budget_rules():
    assert harness.total_budget("paper", 3, 10) == 1300
    assert harness.total_budget("paper", 20, 10) == 3000
    assert harness.total_budget("paper-x10", 2, 10) == 12000
    assert harness.total_budget("500", 2, 10) == 500


def test_cell_key_roundtrip_and_seeds():
    c = Cell("int", "rastrigin", 3, 0.1, 4)
    assert c.key == "int/rastrigin/3/0.1/4"
    assert Cell.from_key(c.key) == c
    assert harness.cell_seed(0, c) == harness.cell_seed(0, Cell.from_key(c.key))
    assert harness.cell_seed(0, c) != harness.cell_seed(1, c)
    cfg = ExperimentConfig(["sphere", "rastrigin"], [2, 3], [0.1, 1.0], repeats=5)
    harness.check_seed_collisions(cfg)
    assert len({harness.cell_seed(0, k) for k in cfg.cells()}) == len(cfg.cells())


def test_run_experiment_records_and_resume(tmp_path):
    cfg = parse_config(SMALL)
    recs = run_experiment(cfg, tmp_path)
    assert len(recs) == 3 and len({r.seed for r in recs}) == 3
    for r in recs:
        assert r.evals_used <= 40 and not r.error
        assert abs(r.mean_value - np.mean(r.values)) <= 1e-12

    path = tmp_path / "results.csv"
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[:5] == harness.RESULT_COLUMNS[:5]
    # simulate a crash after two cells, then resume
    path.write_text("\n".join(lines[:3]) + "\n")
    again = run_experiment(cfg, tmp_path)
    keys = [r.key for r in harness.read_results(path)]
    assert len(keys) == len(set(keys)) == 3
    redone = {r.key: r for r in again}[recs[2].key]
    assert redone.points == recs[2].points and redone.values == recs[2].values
    # nothing left to do
    assert len(run_experiment(cfg, tmp_path)) == 3
    assert len(path.read_text().splitlines()) == 4


def test_rerun_is_byte_reproducible(tmp_path):
    cfg = parse_config(SMALL)
    a = run_experiment(cfg, tmp_path / "a")
    b = run_experiment(cfg, tmp_path / "b")
    strip = lambda r: r.to_row()[:5] + [json.dumps({k: v for k, v in json.loads(r.to_row()[5]).items()  # noqa: E731
                                                    if k != "wall_time"})]
    assert [strip(r) for r in a] == [strip(r) for r in b]


def test_failing_cell_is_recorded(tmp_path):
    cfg = parse_config(SMALL.replace("budget_rule = 40", "budget_rule = 5").replace("repeats = 3", "repeats = 1"))
    recs = run_experiment(cfg, tmp_path)
    assert len(recs) == 1 and recs[0].error.startswith("InsufficientBudget")
    assert harness.read_results(tmp_path / "results.csv")[0].error == recs[0].error


def test_worker_pool(tmp_path):
    cfg = parse_config(SMALL.replace("repeats = 3", "repeats = 2"))
    pooled = run_experiment(cfg, tmp_path / "p", workers=2)
    serial = run_experiment(cfg, tmp_path / "s")
    assert sorted((r.key, r.values) for r in pooled) == sorted((r.key, r.values) for r in serial)


def test_large_dim_budget_ceiling():
    cfg = ExperimentConfig(["sphere"], [20], [1.0], m=2, repeats=1, budget_rule="paper",
                           algorithms=["seq"], optimizer={"n_candidates": 200})
    rec = harness.run_cell(cfg, cfg.cells()[0])
    assert not rec.error
    assert rec.evals_used == harness.total_budget("paper", 20, 2) == 600
    assert rec.evals_used <= harness.total_budget("paper", 20, 10) == 3000


def _record(algo, rep, values, function="sphere"):
    pts = [[float(i), 0.0] for i in range(len(values))]
    return RunRecord(algo, function, 2, 1.0, rep, rep, pts, list(values), [True] * len(values), True, 10)


def test_summarize_single_algorithm():
    rows = harness.summarize([_record("seq", r, [1.0, 2.0]) for r in range(3)])
    assert len(rows) == 1
    assert rows[0].symbols == {"seq": ""} and rows[0].stdevs["seq"] == 0.0
    assert rows[0].means["seq"] == 1.5


def test_summarize_symbols_match_pairwise_compare():
    recs = []
    for rep in range(10):
        recs.append(_record("seq", rep, [rep, rep]))
        recs.append(_record("int", rep, [100 + rep, 100 + rep]))
        recs.append(_record("robot", rep, [200 + rep, 200 + rep]))
    row = harness.summarize(recs)[0]
    ref = stats.pairwise_compare({a: [r.mean_value for r in recs if r.algorithm == a]
                                  for a in ("seq", "int", "robot")})
    assert row.symbols == {a: ref.symbols(a) for a in ("seq", "int", "robot")}
    assert row.symbols == {"seq": "2+ 3+", "int": "1- 3+", "robot": "1- 2-"}
    text = harness.format_summary([row])
    assert "2+ 3+" in text and "1:seq mean" in text
    csv_rows = list(csv.reader(harness.format_summary([row], "csv").splitlines()))
    assert csv_rows[1][:3] == ["1", "sphere", "2"]


def test_scatter_files(tmp_path):
    rec = _record("seq", 0, [0.5, 1.5])
    rec.shift = [0.0, 0.0]
    paths = harness.emit_scatter([rec], "sphere", tmp_path)
    grid, points, svg = paths
    assert len(grid.read_text().splitlines()) == 1 + 201 * 201
    rows = list(csv.DictReader(points.open()))
    assert [(r["kind"], float(r["x1"]), float(r["x2"])) for r in rows][-1] == ("optimum", 0.0, 0.0)
    assert [[float(r["x1"]), float(r["x2"])] for r in rows[:-1]] == rec.points
    assert [float(r["f"]) for r in rows[:-1]] == rec.values
    assert svg.read_text().startswith("<svg")
    with pytest.raises(UnsupportedDim):
        harness.emit_scatter([rec], "sphere", tmp_path, dim=3)


def test_random_shift_is_reproducible():
    a = harness.make_objective("rastrigin", 3, "random", 1)
    b = harness.make_objective("rastrigin", 3, "random", 1)
    np.testing.assert_array_equal(a.shift, b.shift)
    assert np.all(np.abs(a.shift) <= 4)
    assert np.all(harness.make_objective("linear-slope", 3, "random", 1).shift == 0)


def test_cli_end_to_end(tmp_path, capsys):
    cfg_path = tmp_path / "exp.ini"
    cfg_path.write_text(SMALL.replace("algorithms = seq", "algorithms = seq, robot").replace("repeats = 3", "repeats = 2"))
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert "4 records" in capsys.readouterr().out
    assert (out / "summary.txt").exists() and (out / "summary.csv").exists()

    assert cli.main(["compare", "--results", str(out / "results.csv"), "--format", "csv"]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0].startswith("tau,function,D,1:seq mean")

    assert cli.main(["scatter", "--results", str(out / "results.csv"), "--function", "sphere",
                     "--tau", "1.0", "--out", str(tmp_path / "sc")]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 4 * 3


def test_cli_bench_one(capsys):
    assert cli.main(["bench-one", "--function", "sphere", "--dim", "2", "--tau", "1", "--algo", "int",
                     "--budget", "120", "--m", "2", "--max-phases", "2", "--seed", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 3 and out[-1].startswith("mean=") and "evals=120" in out[-1]


def test_cli_rejects_unknown_function():
    with pytest.raises(SystemExit):
        cli.main(["bench-one", "--function", "teapot", "--dim", "2", "--tau", "1", "--algo", "seq"])
