"""End-to-end checks of the command-line interface."""

import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from etgl.cli import main


def run_cli(args):
    """Run the CLI in-process, capturing exit code."""
    return main(args)


def train_args(out_dir, extra=()):
    return ["train", "--env", "wallmaze", "--algo", "etgl", "--seed", "3",
            "--frames", "3000", "--checkpoint-interval", "1000",
            "--warmup", "500", "--out-dir", str(out_dir), *extra]


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert run_cli(train_args(out)) == 0
    return out


def read_rows(path):
    with open(path) as f:
        return list(csv.reader(line for line in f if not line.startswith("#")))


def test_train_writes_expected_artifacts(trained):
    for name in ("metrics.csv", "checkpoint.txt", "config.txt"):
        assert (trained / name).exists()


def test_metrics_row_count_matches_interval(trained):
    rows = read_rows(trained / "metrics.csv")
    # header + ceil(3000/1000) checkpoint rows
    assert len(rows) == 1 + 3
    steps = [int(r[0]) for r in rows[1:]]
    assert steps == [1000, 2000, 3000]


def test_partial_final_interval_still_logged(tmp_path):
    out = tmp_path / "partial"
    assert run_cli(["train", "--env", "wallmaze", "--algo", "ddpg",
                    "--seed", "1", "--frames", "1500",
                    "--checkpoint-interval", "1000", "--warmup", "100",
                    "--out-dir", str(out)]) == 0
    steps = [int(r[0]) for r in read_rows(out / "metrics.csv")[1:]]
    assert steps == [1000, 1500]


def test_same_seed_is_bitwise_identical(trained, tmp_path):
    again = tmp_path / "again"
    assert run_cli(train_args(again)) == 0
    for name in ("metrics.csv", "checkpoint.txt"):
        assert (trained / name).read_bytes() == (again / name).read_bytes()


def test_different_seed_differs(trained, tmp_path):
    other = tmp_path / "other"
    args = train_args(other)
    args[args.index("--seed") + 1] = "4"
    assert run_cli(args) == 0
    assert ((trained / "metrics.csv").read_bytes()
            != (other / "metrics.csv").read_bytes())


def test_unknown_env_exits_nonzero_naming_flag(capsys):
    code = run_cli(["train", "--env", "nope"])
    assert code != 0
    assert "--env" in capsys.readouterr().err


def test_bad_budget_exits_nonzero_naming_flag(capsys):
    code = run_cli(["train", "--env", "wallmaze", "--budget", "-2",
                    "--frames", "100"])
    assert code != 0
    assert "--budget" in capsys.readouterr().err


def test_config_file_overridden_by_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("total_frames = 999999\nseed = 8\nhidden = 16 16\n")
    out = tmp_path / "cfgrun"
    assert run_cli(["train", "--config", str(cfg), "--frames", "1000",
                    "--checkpoint-interval", "500", "--warmup", "100",
                    "--out-dir", str(out)]) == 0
    text = (out / "config.txt").read_text()
    assert "total_frames = 1000" in text   # flag beats file
    assert "seed = 8" in text              # file beats default
    assert "hidden = 16 16" in text


def test_eval_runs_on_checkpoint(trained, capsys):
    code = run_cli(["eval", str(trained / "checkpoint.txt"),
                    "--env", "wallmaze", "--episodes", "5", "--seed", "0"])
    assert code == 0
    out = capsys.readouterr().out
    assert "success rate" in out and "mean return" in out


def test_eval_unreadable_checkpoint(capsys):
    assert run_cli(["eval", "/no/such/file"]) != 0


def test_replay_stats_extracts_columns(trained, tmp_path):
    out = tmp_path / "stats.csv"
    assert run_cli(["replay-stats", str(trained / "metrics.csv"),
                    "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == ["step", "dbeta_size", "de_size", "success_rate"]
    assert len(rows) == 4


def test_theorem_check_reports_pass(capsys):
    assert run_cli(["theorem-check", "--sizes", "3,3",
                    "--state-action-size", "100"]) == 0
    out = capsys.readouterr().out
    assert "P >= bound: True" in out


def test_coverage_sweep_single_cell(tmp_path):
    out = tmp_path / "sweep"
    assert run_cli(["coverage-sweep", "--env", "wallmaze",
                    "--budgets", "5", "--strategies", "etgreedy",
                    "--frames", "2000", "--seeds", "1",
                    "--out-dir", str(out)]) == 0
    rows = read_rows(out / "coverage.csv")
    assert rows[0] == ["budget", "etgreedy"]
    assert len(rows) == 2
    cov = float(rows[1][1])
    assert 0.0 <= cov <= 1.0
    long_rows = read_rows(out / "coverage_runs.csv")
    assert long_rows[0] == ["strategy", "budget", "seed", "coverage"]
    assert len(long_rows) == 2


def test_console_script_entry_point(tmp_path):
    # the installed `etgl` script should resolve to the same CLI
    proc = subprocess.run([sys.executable, "-m", "etgl.cli", "theorem-check",
                           "--sizes", "2,2", "--no-enumerate"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "factorial lower bound" in proc.stdout
