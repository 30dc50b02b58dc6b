"""Tests for the command-line interface and the packaged selftest."""

import json

import pytest

from cheapboot import parse_reports
from cheapboot.cli import build_parser, main
from cheapboot.selftest import run_selftest


def test_run_cell_summary_and_csv(tmp_path, capsys):
    out = tmp_path / "cell.csv"
    rc = main([
        "run", "--method", "conb", "--d", "2", "--n", "400", "--B", "2",
        "--trials", "3", "--seed", "5", "--out", str(out), "--format", "csv",
    ])
    assert rc == 0
    text = capsys.readouterr().out
    assert "conb linear d=2 n=400" in text
    assert "coverage" in text
    records = parse_reports(out)
    assert len(records) == 1
    assert records[0]["method"] == "conb"
    assert records[0]["trials"] == 3
    assert records[0]["seed"] == 5


def test_run_uses_pinned_eta_and_method_default_b(capsys):
    rc = main(["run", "--method", "conb", "--d", "2", "--n", "300", "--trials", "2"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "eta=0.5" in text   # pinned default for linear/conb/identity
    assert "B=3" in text       # method default thread count


def test_run_requires_method(capsys):
    rc = main(["run", "--d", "2", "--trials", "2"])
    assert rc == 2
    assert "method is required" in capsys.readouterr().err


def test_config_file_feeds_missing_flags(tmp_path, capsys):
    cfg = tmp_path / "cell.json"
    cfg.write_text(json.dumps({
        "method": "delta", "d": 2, "n": 300, "trials": 2, "eta": 0.45,
    }))
    rc = main(["run", "--config", str(cfg)])
    assert rc == 0
    assert "delta linear d=2 n=300" in capsys.readouterr().out


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "cell.json"
    cfg.write_text(json.dumps({"method": "delta", "d": 2, "n": 300, "trials": 2}))
    rc = main(["run", "--config", str(cfg), "--n", "500"])
    assert rc == 0
    assert "n=500" in capsys.readouterr().out


def test_invalid_cell_reports_error_not_traceback(capsys):
    rc = main([
        "run", "--method", "conb", "--d", "1", "--n", "300", "--trials", "2",
    ])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_sweep_runs_each_eta(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = main([
        "sweep", "--method", "conb", "--d", "2", "--n", "300", "--B", "2",
        "--trials", "2", "--eta-grid", "0.3,0.6", "--out", str(out),
    ])
    assert rc == 0
    records = parse_reports(out)
    assert [r["eta"] for r in records] == [0.3, 0.6]


def test_sweep_rejects_eta_outside_range(capsys):
    rc = main([
        "sweep", "--method", "conb", "--d", "2", "--n", "300", "--B", "2",
        "--trials", "2", "--eta-grid", "0.1,0.5",
    ])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_table_runs_whole_grid(tmp_path, capsys, monkeypatch):
    import cheapboot.cli as cli
    from cheapboot import ExperimentReport

    def fake_run_cell(config):
        return ExperimentReport(
            coverage_mean=0.95, coverage_se=0.01, mean_length=0.1,
            length_se=0.01, wall_time_s=0.0,
            per_coordinate_coverage=(0.95,) * config.d, config=config,
        )

    monkeypatch.setattr(cli, "run_cell", fake_run_cell)
    out = tmp_path / "table.csv"
    rc = main(["table", "--problem", "linear", "--trials", "4", "--out", str(out)])
    assert rc == 0
    records = parse_reports(out)
    assert len(records) == 84  # 14 method rows x 3 sigmas x 2 dims
    assert {r["trials"] for r in records} == {4}
    progress = capsys.readouterr().out
    assert "[84/84]" in progress


def test_parser_rejects_unknown_method():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--method", "bayes"])


def test_selftest_passes_and_cli_exit_code(capsys):
    assert run_selftest(verbose=False)
    rc = main(["selftest"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 7
    assert all(line.startswith("[PASS]") for line in lines)
