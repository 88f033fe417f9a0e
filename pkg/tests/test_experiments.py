from pathlib import Path

import pytest
from sqlalchemy import func, select

from kawlab.config import get_settings
from kawlab.database import get_db
from kawlab.exceptions import EXIT_NUMERICAL_ERROR, ConfigError
from kawlab.experiments import run_experiment
from kawlab.experiments.ledger import headline_metrics, record_run
from kawlab.experiments.sweep import grid, run_cell, sweep_cells
from kawlab.models import ExperimentRun, SweepCell
from kawlab.schemas import ExperimentReport, load_config, parse_config

SWEEP = """
experiment:
  kind: sweep
grid:
  n: 16
sweep:
  alpha: [0.0, 0.5]
  n: [16, 32]
"""

SHORT_PERIODIC = """
experiment:
  kind: massera_periodic
  seed: 4
grid:
  n: 16
forcing:
  variant: periodic
  period: 1.0
  amplitude: 0.01
horizons:
  t_final: 1.0
  t_min: 0.1
"""


def test_grid_is_the_cartesian_product():
    points = list(grid({"a": [1, 2], "b": [3]}))
    assert points == [{"a": 1, "b": 3}, {"a": 2, "b": 3}]


def test_sweep_cells_are_ordered():
    cells = sweep_cells(parse_config(SWEEP))
    assert [c["index"] for c in cells] == [0, 1, 2, 3]
    assert [c["parameters"] for c in cells] == [
        {"alpha": 0.0, "n": 16},
        {"alpha": 0.0, "n": 32},
        {"alpha": 0.5, "n": 16},
        {"alpha": 0.5, "n": 32},
    ]
    assert cells[3]["config"]["grid"] == {"alpha": 0.5, "n": 32}
    assert all(c["config"]["experiment"]["kind"] == "linear" for c in cells)
    assert "sweep" not in cells[0]["config"]


def test_sweep_cap_is_enforced(monkeypatch):
    monkeypatch.setenv("KAWLAB_SWEEP_CAP", "3")
    get_settings.cache_clear()
    with pytest.raises(ConfigError) as info:
        sweep_cells(parse_config(SWEEP))
    assert info.value.key == "sweep"


def test_invalid_cell_is_captured(tmp_path):
    row = run_cell({"index": 7, "parameters": {"alpha": 2.0}, "config": {"grid": {"alpha": 2.0}}}, str(tmp_path))
    assert row["index"] == 7
    assert row["status"] == "error"
    assert row["passed"] is False
    assert "alpha" in row["error"]


def test_linear_experiment_runs(small_config, tmp_path):
    report = run_experiment(load_config(small_config), out_dir=tmp_path / "linear", record=False)
    assert report.status == "ok"
    assert report.exit_code in (0, 1)
    verdicts = {v.name: v for v in report.verdicts}
    assert verdicts["contraction"].passed
    assert verdicts["decay_rate_positive"].passed
    spread = verdicts["smoothing_spread"]
    assert spread.threshold == 3.0
    assert spread.value == pytest.approx(report.metrics["smoothing"]["spread"])
    assert Path(report.files["report"]).is_file()
    assert Path(report.files["linear"]).is_file()
    assert report.metrics["decay_fit"]["omega"] > 0.0


def test_short_periodic_run_reports_a_coverage_error(tmp_path):
    report = run_experiment(parse_config(SHORT_PERIODIC), out_dir=tmp_path / "periodic", record=False)
    assert report.status == "error"
    assert report.exit_code == EXIT_NUMERICAL_ERROR
    assert report.stage == "massera"
    assert not report.passed
    assert Path(report.files["report"]).is_file()


def test_default_output_directory(small_config):
    report = run_experiment(load_config(small_config), record=False)
    expected = get_settings().output_dir / "linear-seed3" / "report.yaml"
    assert Path(report.files["report"]) == expected


def test_headline_metrics():
    report = ExperimentReport(kind="linear", metrics={"gamma": 0.5, "internal": 1.0})
    assert headline_metrics(report) == {"gamma": 0.5}


def test_runs_are_recorded_in_the_ledger():
    report = ExperimentReport(kind="sweep", seed=9, metrics={"nu": 0.1})
    report.check("cells_passed", True, 0, 0)
    report.children = [
        {"index": 0, "parameters": {"alpha": 0.0}, "status": "ok", "metrics": {"omega": 1.0}, "error": None},
        {"index": 1, "parameters": {"alpha": 0.5}, "status": "error", "metrics": {}, "error": "boom"},
    ]
    run_id = record_run(report)
    assert run_id is not None
    with get_db() as db:
        run = db.get(ExperimentRun, run_id)
        assert run.kind == "sweep"
        assert run.verdict == "pass"
        assert run.metrics == {"nu": 0.1}
        assert [cell.cell_index for cell in run.cells] == [0, 1]
        assert db.scalar(select(func.count()).select_from(SweepCell)) == 2


def test_ledger_failures_are_not_fatal(tmp_path):
    report = ExperimentReport(kind="linear")
    assert record_run(report, f"sqlite:///{tmp_path / 'missing' / 'dir' / 'ledger.db'}") is None


SHORT_BOUNDED = """
experiment:
  kind: nonlinear
  seed: 2
grid:
  alpha: 0.5
  n: 16
stepper:
  dt: 0.001
forcing:
  variant: periodic
  period: 1.0
  amplitude: 0.01
horizons:
  t_final: 2.0
  stride: 10
"""


def test_bounded_run_reports_the_size_of_the_solution(tmp_path):
    report = run_experiment(parse_config(SHORT_BOUNDED), out_dir=tmp_path / "bounded", record=False)
    assert report.status == "ok"
    assert report.metrics["c1_norm"] == pytest.approx(0.0628318, rel=1e-6)
    ratio = report.metrics["sup_norm_over_epsilon"]
    assert ratio == pytest.approx(report.metrics["sup_norm"] / report.metrics["c1_norm"])
    verdicts = {v.name: v for v in report.verdicts}
    assert verdicts["bounded"].passed
    assert verdicts["sup_norm_over_epsilon"].passed
    assert verdicts["sup_norm_over_epsilon"].value == pytest.approx(ratio)
    assert verdicts["sup_norm_over_epsilon"].threshold == 10.0


SMALL_SWEEP = """
experiment:
  kind: sweep
  seed: 5
  ensemble: 1
grid:
  n: 16
stepper:
  dt: 0.001
horizons:
  t_final: 0.5
  t_min: 0.1
  smoothing_times: [0.01, 0.1]
sweep:
  alpha: [0.0, 0.5]
"""


def test_sweep_with_a_fixed_seed_is_reproducible(tmp_path):
    cfg = parse_config(SMALL_SWEEP)
    first = run_experiment(cfg, out_dir=tmp_path / "first", record=False, workers=1)
    second = run_experiment(cfg, out_dir=tmp_path / "second", record=False, workers=1)
    assert first.status == second.status == "ok"
    assert [c["metrics"] for c in first.children] == [c["metrics"] for c in second.children]
    assert headline_metrics(first) == headline_metrics(second)

    ids = [record_run(first), record_run(second)]
    with get_db() as db:
        runs = [db.get(ExperimentRun, run_id) for run_id in ids]
        assert runs[0].metrics == runs[1].metrics
        assert runs[0].verdict == runs[1].verdict
        assert [c.metrics for c in runs[0].cells] == [c.metrics for c in runs[1].cells]
