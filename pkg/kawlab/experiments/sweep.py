"""
Parameter sweeps: the cartesian product of the listed values, one isolated
run per cell, aggregated in cell order.
"""

import copy
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from kawlab.config import get_settings
from kawlab.exceptions import ConfigError, KawlabError
from kawlab.schemas.config import RunConfig, validate_config
from kawlab.schemas.report import ExperimentReport

logger = logging.getLogger(__name__)

AXES = ("alpha", "epsilon", "n", "forcing")
SUMMARY = {
    "omega": ("decay_fit", "omega"),
    "gamma": ("gamma",),
    "nu": ("nu",),
    "sup_norm": ("sup_norm",),
    "headline_residual": ("headline_residual",),
}


def grid(spec: dict):
    for values in itertools.product(*spec.values()):
        yield dict(zip(spec.keys(), values))


def _label(name: str, value):
    return value["variant"] if name == "forcing" else value


def sweep_cells(cfg: RunConfig) -> list[dict]:
    """Child configurations (as raw dicts) with the parameters that define them."""
    spec = cfg.sweep
    axes = {
        name: [v.model_dump(mode="json") for v in values] if name == "forcing" else list(values)
        for name in AXES
        if (values := getattr(spec, name))
    }
    total = 1
    for values in axes.values():
        total *= len(values)
    cap = get_settings().sweep_cap
    if total > cap:
        raise ConfigError(f"sweep has {total} cells, more than the cap of {cap}", key="sweep")

    base = cfg.echo()
    base.pop("sweep")
    base["experiment"]["kind"] = spec.base
    cells = []
    for index, point in enumerate(grid(axes) if axes else [{}]):
        data = copy.deepcopy(base)
        if "forcing" in point:
            data["forcing"] = copy.deepcopy(point["forcing"])
        if "epsilon" in point:
            data["forcing"]["epsilon"] = point["epsilon"]
        if "alpha" in point:
            data["grid"]["alpha"] = point["alpha"]
        if "n" in point:
            data["grid"]["n"] = point["n"]
        cells.append(
            {
                "index": index,
                "parameters": {name: _label(name, value) for name, value in point.items()},
                "config": data,
            }
        )
    return cells


def _summary(report: ExperimentReport) -> dict:
    metrics = report.to_dict()["metrics"]
    out = {}
    for name, path in SUMMARY.items():
        node = metrics
        for key in path:
            node = node.get(key) if isinstance(node, dict) else None
        if node is not None:
            out[name] = node
    return out


def run_cell(cell: dict, out_dir: str) -> dict:
    """Execute one cell; errors are captured in the returned row."""
    from kawlab.experiments.runner import run_experiment

    row = {"index": cell["index"], "parameters": cell["parameters"]}
    try:
        child = validate_config(cell["config"])
    except KawlabError as exc:
        return {**row, "status": "error", "passed": False, "metrics": {}, "error": str(exc)}
    report = run_experiment(child, out_dir=Path(out_dir) / f"cell-{cell['index']:03d}", record=False)
    return {
        **row,
        "status": report.status,
        "passed": report.passed,
        "metrics": _summary(report),
        "error": report.error,
    }


def run_sweep(
    cfg: RunConfig, report: ExperimentReport, out_dir: Path, workers: int | None = None
) -> None:
    cells = sweep_cells(cfg)
    workers = workers or get_settings().workers
    logger.info("sweep: %d cells of %s on %d worker(s)", len(cells), cfg.sweep.base, workers)

    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_cell, cell, str(out_dir)) for cell in cells]
            rows = [future.result() for future in futures]
    else:
        rows = [run_cell(cell, str(out_dir)) for cell in cells]

    rows.sort(key=lambda row: row["index"])
    for row in rows:
        if row["status"] != "ok":
            logger.warning("sweep cell %d failed: %s", row["index"], row["error"])
    report.children = rows
    report.metrics["cells"] = len(rows)
    errored = sum(row["status"] != "ok" for row in rows)
    failed = sum(not row["passed"] for row in rows)
    report.check("cells_completed", errored == 0, errored, 0)
    report.check("cells_passed", failed == 0, failed, 0)
