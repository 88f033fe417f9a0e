from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import yaml
from pydantic import BaseModel, Field


def plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


class Verdict(BaseModel):
    """One checked claim: ``value`` compared against ``threshold``."""

    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    detail: str | None = None


class ExperimentReport(BaseModel):
    kind: str
    status: str = "ok"
    seed: int | None = None
    stage: str | None = None
    exit_code: int = 0
    error: str | None = None
    config: dict[str, Any] = {}
    metrics: dict[str, Any] = {}
    verdicts: list[Verdict] = []
    files: dict[str, str] = {}
    children: list[dict[str, Any]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(v.passed for v in self.verdicts)

    def check(self, name: str, passed: bool, value=None, threshold=None, detail: str | None = None) -> bool:
        self.verdicts.append(
            Verdict(
                name=name,
                passed=bool(passed),
                value=None if value is None else float(value),
                threshold=None if threshold is None else float(threshold),
                detail=detail,
            )
        )
        return bool(passed)

    def to_dict(self) -> dict[str, Any]:
        data = plain(self.model_dump())
        data["passed"] = self.passed
        return data

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def write(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_yaml(), encoding="utf-8")
        return path
