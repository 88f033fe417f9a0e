from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from kawlab.exceptions import ConfigError
from kawlab.schemas import ExperimentReport, ForcingSpec, load_config, parse_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

PERIODIC = """
experiment:
  kind: massera_periodic
forcing:
  variant: periodic
  period: 2.0
  amplitude: 0.01
"""


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg.kind == "linear"
    assert cfg.grid.alpha == 0.5
    assert cfg.grid.n == 128
    assert cfg.stepper.theta == 0.5
    assert cfg.forcing.variant == "zero"
    assert cfg.sweep is None


def test_recurrence_runs_default_to_backward_euler_and_the_forcing_period():
    cfg = parse_config(PERIODIC)
    assert cfg.stepper.theta == 1.0
    assert cfg.horizons.period == 2.0


def test_explicit_theta_is_kept():
    cfg = parse_config(PERIODIC + "stepper:\n  theta: 0.5\n")
    assert cfg.stepper.theta == 0.5


@pytest.mark.parametrize(
    "text, key",
    [
        ("grid:\n  alpha: 1.2\n", "grid.alpha"),
        ("grid:\n  n: 4\n", "grid.n"),
        ("stepper:\n  dt: 0\n", "stepper.dt"),
        ("grid:\n  damping: 0.5\n", "grid.damping"),
        ("horizons:\n  window: [2.0, 1.0]\n", "horizons.window"),
    ],
)
def test_invalid_entries_name_their_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key


def test_recurrence_kind_needs_matching_forcing():
    with pytest.raises(ConfigError):
        parse_config("experiment:\n  kind: massera_quasi\n")


def test_sweep_needs_its_section():
    with pytest.raises(ConfigError):
        parse_config("experiment:\n  kind: sweep\n")
    with pytest.raises(ConfigError):
        parse_config("experiment:\n  kind: sweep\nsweep:\n  base: sweep\n")


def test_overrides_are_applied_before_validation():
    cfg = parse_config("grid:\n  n: 32\n", ["grid.alpha=0.25", "horizons.observation=[0.5, 1.0]"])
    assert cfg.grid.alpha == 0.25
    assert cfg.grid.n == 32
    assert cfg.horizons.observation == [0.5, 1.0]
    with pytest.raises(ConfigError) as info:
        parse_config("", ["grid.alpha=1.2"])
    assert info.value.key == "grid.alpha"
    with pytest.raises(ConfigError):
        parse_config("", ["grid.alpha"])


def test_documents_must_be_mappings(tmp_path):
    with pytest.raises(ConfigError):
        parse_config("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        parse_config("grid: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_forcing_size_and_rescaling():
    spec = ForcingSpec(variant="periodic", period=1.0, amplitude=0.01)
    assert spec.size == pytest.approx(0.0628318, rel=1e-6)
    rescaled = ForcingSpec(variant="periodic", period=1.0, amplitude=0.01, epsilon=0.02)
    assert rescaled.size == pytest.approx(0.02)
    assert ForcingSpec().size == 0.0


def test_quasi_forcing_spec_builds_a_torus_signal():
    spec = ForcingSpec(
        variant="quasi_periodic",
        frequencies=[1.0, 2.0**0.5],
        torus_modes=[{"amplitude": 0.005, "wavevector": [1, 0]}, {"amplitude": 0.005, "wavevector": [0, 1]}],
    )
    signal = spec.to_signal()
    assert signal.variant == "quasi_periodic"
    assert len(signal.modes) == 2


@pytest.mark.parametrize(
    "kwargs",
    [
        {"variant": "periodic", "amplitude": 0.01},
        {"variant": "periodic", "period": 1.0},
        {"variant": "quasi_periodic"},
        {"variant": "quasi_periodic", "frequencies": [1.0], "torus_modes": [{"amplitude": 1.0, "wavevector": [1, 0]}]},
        {"variant": "almost_periodic", "modes": [{"amplitude": 1.0}]},
        {"variant": "zero", "extra": 1},
    ],
)
def test_invalid_forcing_specs(kwargs):
    with pytest.raises(ValidationError):
        ForcingSpec(**kwargs)


def test_shipped_configurations_validate():
    paths = sorted(CONFIG_DIR.glob("*.yaml"))
    assert len(paths) >= 9
    kinds = {load_config(path).kind for path in paths}
    assert {"linear", "massera_periodic", "massera_quasi", "massera_almost", "sweep"} <= kinds


def test_report_serialization(tmp_path):
    report = ExperimentReport(kind="linear", seed=1)
    assert report.check("contraction", True, value=0.0, threshold=1e-12)
    assert not report.check("fit", False, detail="rmse too large")
    assert not report.passed
    data = report.to_dict()
    assert data["passed"] is False
    assert [v["name"] for v in data["verdicts"]] == ["contraction", "fit"]
    path = report.write(tmp_path / "out" / "report.yaml")
    assert yaml.safe_load(path.read_text(encoding="utf-8")) == data
