"""
Run configuration: a sectioned YAML document validated into :class:`RunConfig`.

Every model forbids unknown keys. Validation failures surface as
:class:`~kawlab.exceptions.ConfigError` whose ``key`` is the dotted path of
the offending entry (``grid.alpha``, ``stepper.dt``...).
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from kawlab.exceptions import ConfigError
from kawlab.schemas.forcing import ForcingSpec

STRICT = {"extra": "forbid"}

KINDS = (
    "linear",
    "nonlinear",
    "duhamel",
    "massera_periodic",
    "massera_quasi",
    "massera_almost",
    "observability",
    "mms",
    "sweep",
)
MASSERA_KINDS = ("massera_periodic", "massera_quasi", "massera_almost")
MASSERA_VARIANT = {
    "massera_periodic": "periodic",
    "massera_quasi": "quasi_periodic",
    "massera_almost": "almost_periodic",
}

ExperimentKind = Literal[
    "linear",
    "nonlinear",
    "duhamel",
    "massera_periodic",
    "massera_quasi",
    "massera_almost",
    "observability",
    "mms",
    "sweep",
]


class ExperimentSection(BaseModel):
    kind: ExperimentKind = "linear"
    seed: int = 0
    ensemble: int = Field(default=1, ge=1)
    formulation: Literal["direct_u", "lifted_y"] = "direct_u"
    nonlinear_form: Literal["skew", "advective", "conservative"] = "skew"
    alternate_f: bool = False
    initial: Literal["zero", "random"] = "zero"
    initial_amplitude: float = Field(default=1.0, ge=0)

    model_config = STRICT


class GridSection(BaseModel):
    alpha: float = 0.5
    n: int = Field(default=128, ge=8)

    model_config = STRICT

    @field_validator("alpha")
    @classmethod
    def _damping_range(cls, value: float) -> float:
        if not -1.0 < value < 1.0:
            raise ValueError(f"|alpha| must be < 1, got {value}")
        return value


class StepperSection(BaseModel):
    dt: float = Field(default=1e-3, gt=0)
    # None resolves per experiment kind (1.0 for recurrence runs, else 0.5)
    theta: float | None = Field(default=None, ge=0.5, le=1.0)

    model_config = STRICT


class HorizonsSection(BaseModel):
    t_final: float = Field(default=10.0, gt=0)
    # None picks the decay-fit window from the spectrum
    t_min: float | None = Field(default=None, ge=0)
    stride: int = Field(default=1, ge=1)
    window: tuple[float, float] | None = None
    t_cut: float | None = Field(default=None, ge=0)
    period: float | None = Field(default=None, gt=0)
    observation: list[float] = [1.0]
    windows: int = Field(default=5, ge=3)
    smoothing_times: list[float] = [0.01, 0.05, 0.1, 0.5, 1.0]
    shift: float = Field(default=0.7, ge=0)
    scan_length: float = Field(default=200.0, gt=0)
    scan_resolution: float = Field(default=0.01, gt=0)
    translation_samples: int = Field(default=10, ge=1)

    model_config = STRICT

    @field_validator("observation", "smoothing_times")
    @classmethod
    def _positive_times(cls, value: list[float]) -> list[float]:
        if not value or any(t <= 0 for t in value):
            raise ValueError("times must be a nonempty list of positive numbers")
        return value

    @field_validator("window")
    @classmethod
    def _ordered_window(cls, value):
        if value is not None and not value[1] > value[0]:
            raise ValueError("window must satisfy t_lo < t_hi")
        return value


class TolerancesSection(BaseModel):
    contraction: float = Field(default=1e-12, gt=0)
    energy_rate: float = Field(default=1e-4, gt=0)
    inequality: float = Field(default=1e-4, gt=0)
    fit_rmse: float = Field(default=0.05, gt=0)
    abscissa: float = Field(default=0.1, gt=0)
    picard: float = Field(default=1e-8, gt=0)
    periodicity: float = Field(default=1e-6, gt=0)
    recurrence_factor: float = Field(default=10.0, gt=0)
    translation_delta: float = Field(default=0.1, gt=0)
    calibration: float = Field(default=50.0, gt=0)
    mms_order: float = Field(default=1.8, gt=0)
    smoothing_spread: float = Field(default=3.0, gt=1)
    bounded_ratio: float = Field(default=10.0, gt=0)

    model_config = STRICT


class OutputSection(BaseModel):
    dir: Path | None = None
    trajectory: bool = True
    csv: bool = False

    model_config = STRICT


class MMSSection(BaseModel):
    refine: Literal["space", "time", "both"] = "both"
    nonlinear: bool = True
    time_factor: Literal["cos", "exp", "sin"] = "cos"
    ns: list[int] = [16, 32, 64]
    dts: list[float] = [4e-3, 2e-3, 1e-3]
    t_final: float = Field(default=0.1, gt=0)

    model_config = STRICT

    @field_validator("ns")
    @classmethod
    def _grid_sizes(cls, value: list[int]) -> list[int]:
        if len(value) < 2 or any(n < 8 for n in value):
            raise ValueError("need at least two grid sizes, each >= 8")
        return value

    @field_validator("dts")
    @classmethod
    def _steps(cls, value: list[float]) -> list[float]:
        if len(value) < 2 or any(dt <= 0 for dt in value):
            raise ValueError("need at least two positive time steps")
        return value


class SweepSection(BaseModel):
    """Cartesian lists; cells are validated one by one when the sweep runs."""

    base: ExperimentKind = "linear"
    alpha: list[float] | None = None
    epsilon: list[float] | None = None
    n: list[int] | None = None
    forcing: list[ForcingSpec] | None = None

    model_config = STRICT

    @field_validator("base")
    @classmethod
    def _no_nesting(cls, value: str) -> str:
        if value == "sweep":
            raise ValueError("sweeps cannot be nested")
        return value


class RunConfig(BaseModel):
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    grid: GridSection = Field(default_factory=GridSection)
    stepper: StepperSection = Field(default_factory=StepperSection)
    forcing: ForcingSpec = Field(default_factory=ForcingSpec)
    horizons: HorizonsSection = Field(default_factory=HorizonsSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    output: OutputSection = Field(default_factory=OutputSection)
    mms: MMSSection = Field(default_factory=MMSSection)
    sweep: SweepSection | None = None

    model_config = STRICT

    @model_validator(mode="after")
    def _resolve(self) -> RunConfig:
        kind = self.experiment.kind
        if self.stepper.theta is None and kind != "sweep":
            self.stepper.theta = 1.0 if kind in MASSERA_KINDS else 0.5
        if kind in MASSERA_VARIANT and self.forcing.variant != MASSERA_VARIANT[kind]:
            raise ValueError(f"{kind} needs {MASSERA_VARIANT[kind]} forcing, got {self.forcing.variant}")
        if kind == "massera_periodic" and self.horizons.period is None:
            self.horizons.period = self.forcing.period
        if kind == "sweep" and self.sweep is None:
            raise ValueError("kind sweep needs a sweep section")
        return self

    @property
    def kind(self) -> str:
        return self.experiment.kind

    def echo(self) -> dict[str, Any]:
        """The validated configuration with every default filled in."""
        return self.model_dump(mode="json")


def _dotted(loc: tuple) -> str:
    return ".".join(str(part) for part in loc if not str(part).startswith("function-after"))


def apply_overrides(data: dict, overrides: list[str] | None) -> dict:
    """Apply ``section.key=value`` overrides; values are parsed as YAML scalars."""
    for item in overrides or []:
        path, sep, raw = item.partition("=")
        if not sep or not path:
            raise ConfigError(f"override {item!r} is not of the form section.key=value", key=path or None)
        keys = path.strip().split(".")
        node = data
        for key in keys[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ConfigError("cannot override inside a scalar value", key=path)
            node = child
        node[keys[-1]] = yaml.safe_load(raw)
    return data


def validate_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = _dotted(first["loc"]) or None
        raise ConfigError(first["msg"], key=key, stage="config") from exc


def parse_config(text: str, overrides: list[str] | None = None) -> RunConfig:
    """Parse and validate a YAML run configuration."""
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}", stage="config") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of sections", stage="config")
    return validate_config(apply_overrides(data, overrides))


def load_config(path: Path | str, overrides: list[str] | None = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}", stage="config")
    return parse_config(path.read_text(encoding="utf-8"), overrides)
