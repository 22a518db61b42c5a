import csv
import json
import math

import numpy as np
import pytest

from efce_learning.cli import CSV_FIELDS, emit_csv, main, summary
from efce_learning.efg import game_indices, load_game
from efce_learning.evaluation import equilibrium_gap, run_dynamics


def _run(tmp_path, *args, name="run"):
    out_csv = tmp_path / f"{name}.csv"
    out_json = tmp_path / f"{name}.json"
    code = main([*args, "--out-csv", str(out_csv), "--out-json", str(out_json)])
    return code, out_csv, out_json


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_micro_smoke(tmp_path):
    code, out_csv, out_json = _run(tmp_path, "--game", "micro", "--alg", "lrl-oftrl", "--mode", "efce",
                                   "--T", "100", "--eta", "1.0")
    assert code == 0
    rows = _rows(out_csv)
    assert tuple(rows[0].keys()) == CSV_FIELDS
    # checkpoints 1, 2, 4, ..., 64, 100 for two players
    assert len(rows) == 2 * 8
    assert {r["player"] for r in rows} == {"0", "1"}
    info = json.loads(out_json.read_text())
    assert info["config"]["T"] == 100 and info["config"]["game"] == "micro"
    assert info["max_fixed_point_residual"] <= 1e-9


def test_zero_T_is_a_configuration_error(tmp_path, capsys):
    code, out_csv, _ = _run(tmp_path, "--T", "0")
    assert code == 2
    assert "--T" in capsys.readouterr().err
    assert not out_csv.exists()


@pytest.mark.parametrize("args", [
    ["--game", "chess"],
    ["--game", "kuhn:ranks=1"],
    ["--alg", "sgd"],
    ["--eta", "0"],
    ["--eta-delta", "-1"],
    ["--checkpoints", "0,5"],
    ["--checkpoints", "a,b"],
    ["--T", "ten"],
])
def test_bad_flags_exit_2(tmp_path, args):
    code, _, _ = _run(tmp_path, *args)
    assert code == 2


def test_missing_output_directory(tmp_path):
    code = main(["--T", "2", "--out-csv", str(tmp_path / "nope" / "a.csv"), "--out-json", str(tmp_path / "a.json")])
    assert code == 2


def test_runtime_failure_exits_1(tmp_path, monkeypatch):
    from efce_learning import cli
    from efce_learning.learners import SolverError

    def boom(*a, **k):
        raise SolverError("no convergence")

    monkeypatch.setattr(cli, "run_dynamics", boom)
    code, _, _ = _run(tmp_path, "--T", "2")
    assert code == 1


def test_checkpoint_rows(tmp_path):
    code, out_csv, _ = _run(tmp_path, "--game", "micro", "--T", "5", "--checkpoints", "1,2")
    assert code == 0
    rows = _rows(out_csv)
    assert [(r["t"], r["player"]) for r in rows] == [("1", "0"), ("1", "1"), ("2", "0"), ("2", "1")]


def test_csv_is_byte_identical_on_rerun(tmp_path):
    args = ["--game", "kuhn", "--alg", "lrl-oftrl", "--mode", "efcce", "--T", "30"]
    _, a, _ = _run(tmp_path, *args, name="a")
    _, b, _ = _run(tmp_path, *args, name="b")
    assert a.read_bytes() == b.read_bytes()


def test_csv_round_trip_and_summary_gap(tmp_path):
    g = load_game("kuhn")
    log = run_dynamics(g, "cfr-rm+", "efce", 50, checkpoints=[7, 30], game_spec="kuhn")
    path = tmp_path / "log.csv"
    emit_csv(log, path)
    rows = _rows(path)
    assert len(rows) == len(log.records)
    for r, rec in zip(rows, log.records):
        assert int(r["t"]) == rec["t"] and int(r["player"]) == rec["player"]
        for k in ("trigger_regret", "external_regret", "avg_regret"):
            assert float(r[k]) == pytest.approx(rec[k], rel=1e-11, abs=1e-300)
    # the summary gap covers all 50 rounds although the last checkpoint is 30
    assert summary(log)["equilibrium_gap"] == pytest.approx(equilibrium_gap(log, game_indices(g)), abs=1e-15)


@pytest.mark.slow
def test_three_player_kuhn_baseline(tmp_path):
    code, out_csv, out_json = _run(tmp_path, "--game", "kuhn:players=3,ranks=3", "--alg", "cfr-rm", "--T", "1000")
    assert code == 0
    rows = _rows(out_csv)
    assert {r["player"] for r in rows} == {"0", "1", "2"}
    assert all(math.isfinite(float(r[k])) for r in rows for k in CSV_FIELDS[2:])
    info = json.loads(out_json.read_text())
    assert len(info["final"]) == 3
    assert np.isfinite(info["equilibrium_gap"])


def test_module_entry_point_help(capsys):
    assert main(["--help"]) == 0
    assert "--eta-delta" in capsys.readouterr().out
