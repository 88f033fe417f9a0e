#!/usr/bin/env python3
"""
Run the acceptance suite against the reference configurations in configs/.

Each criterion prints one ``[OK]`` or ``[FAIL]`` line; the script exits with
status 1 when any criterion fails.

Usage:
    python scripts/run_acceptance.py              # every criterion
    python scripts/run_acceptance.py --only 1 4   # a subset
"""

import argparse
import logging
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from kawlab.core.energy import energy_rate_check  # noqa: E402
from kawlab.core.mesh import Field, build_grid  # noqa: E402
from kawlab.core.operator import build_operator, dissipativity_report  # noqa: E402
from kawlab.core.semigroup import StepperConfig, evolve_linear, random_initial_data  # noqa: E402
from kawlab.exceptions import ConfigError  # noqa: E402
from kawlab.experiments import run_experiment  # noqa: E402
from kawlab.logging_setup import configure_logging  # noqa: E402
from kawlab.schemas.config import load_config, parse_config  # noqa: E402
from kawlab.trajectory_io import read_trajectory, write_trajectory  # noqa: E402

logger = logging.getLogger("acceptance")

CONFIG_DIR = PROJECT_ROOT / "configs"


class Suite:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.failures = 0

    def report(self, label: str, passed: bool, detail: str = "") -> None:
        tag = "[OK]  " if passed else "[FAIL]"
        print(f"{tag} {label}" + (f": {detail}" if detail else ""))
        if not passed:
            self.failures += 1

    def run(self, name: str, overrides: list[str] | None = None, tag: str = "", workers: int | None = None):
        cfg = load_config(CONFIG_DIR / f"{name}.yaml", overrides)
        out = self.out_dir / f"{name}{tag}"
        return run_experiment(cfg, out_dir=out, record=False, workers=workers)

    def verdicts(self, label: str, report, names: tuple[str, ...] | None = None) -> bool:
        chosen = [v for v in report.verdicts if names is None or v.name.split("[")[0] in names]
        failed = [v.name for v in chosen if not v.passed]
        passed = report.status == "ok" and bool(chosen) and not failed
        detail = report.error if report.status != "ok" else (", ".join(failed) or f"{len(chosen)} verdicts")
        self.report(label, passed, detail)
        return passed


def quintic(x):
    return x**2 * (1.0 - x) ** 3


def reflected_quintic(x):
    return x**3 * (1.0 - x) ** 2


def criterion_dissipativity(suite: Suite) -> None:
    ns = (50, 100, 200, 400)
    for adjoint, profile in ((False, quintic), (True, reflected_quintic)):
        gaps = []
        for n in ns:
            grid = build_grid(n)
            op = build_operator(grid, 0.0, adjoint=adjoint)
            gaps.append(abs(dissipativity_report(op, Field.from_function(grid, profile)).gap))
        order = min(math.log2(coarse / fine) for coarse, fine in zip(gaps, gaps[1:]))
        suite.report(
            f"1 dissipativity {'adjoint' if adjoint else 'primal'}",
            gaps[2] < 0.05 and order >= 1.5,
            f"gap(n=200)={gaps[2]:.3g} min order={order:.2f}",
        )


def criterion_contraction(suite: Suite) -> None:
    for alpha in (0.0, 0.5, 0.9):
        report = suite.run("linear", [f"grid.alpha={alpha}", "horizons.t_final=1.0"], tag=f"-contraction-{alpha}")
        suite.verdicts(f"2 contraction alpha={alpha}", report, ("contraction",))


def criterion_energy(suite: Suite) -> None:
    grid = build_grid(256)
    op = build_operator(grid, 0.5)
    u0 = random_initial_data(grid, np.random.default_rng(3))
    traj = evolve_linear(u0, op, StepperConfig(dt=5e-4, theta=0.5), 1.0)
    check = energy_rate_check(traj, 0.5)
    suite.report("3 energy identity", check.relative < 1e-4, f"relative residual {check.relative:.3g}")


def criterion_decay(suite: Suite) -> None:
    report = suite.run("linear")
    suite.verdicts(
        "4 exponential decay",
        report,
        ("decay_rate_positive", "decay_fit_rmse", "rate_matches_spectrum", "h2_decay_rate_positive"),
    )


def criterion_inequalities(suite: Suite) -> None:
    for alpha in (0.0, 0.3, 0.6, 0.9):
        report = suite.run("observability", [f"grid.alpha={alpha}"], tag=f"-{alpha}")
        suite.verdicts(f"5 inequalities alpha={alpha}", report)


def criterion_smoothing(suite: Suite) -> None:
    report = suite.run("linear", ["horizons.t_final=1.0", "experiment.ensemble=1"], tag="-smoothing")
    suite.verdicts("6 smoothing", report, ("smoothing_spread",))


def criterion_bounded(suite: Suite) -> None:
    ratios = []
    for eps in (0.02, 0.01, 0.005):
        report = suite.run("nonlinear", [f"forcing.amplitude={eps}"], tag=f"-{eps}")
        if suite.verdicts(f"7 bounded eps={eps}", report, ("bounded", "sup_norm_over_epsilon")):
            ratios.append(report.metrics["sup_norm_over_epsilon"])
    stable = len(ratios) == 3 and max(ratios) / min(ratios) < 2.0
    suite.report("7 sup/eps stability", stable, ", ".join(f"{r:.4g}" for r in ratios))


def criterion_duhamel(suite: Suite) -> None:
    suite.verdicts("8 duhamel fixed point", suite.run("duhamel"))


def criterion_periodic(suite: Suite) -> None:
    suite.verdicts("9 periodicity", suite.run("massera_periodic"))


def criterion_quasi(suite: Suite) -> None:
    suite.verdicts("10 quasi-periodicity", suite.run("massera_quasi"))


def criterion_almost(suite: Suite) -> None:
    report = suite.run("massera_almost")
    calibration = report.metrics.get("translation_bound", {}).get("calibration")
    print(f"       calibration factor: {calibration}")
    suite.verdicts("11 almost periodicity", report)


def criterion_mms(suite: Suite) -> None:
    for nonlinear in (False, True):
        report = suite.run("mms", [f"mms.nonlinear={str(nonlinear).lower()}"], tag=f"-{nonlinear}")
        suite.verdicts(f"12 manufactured solution nonlinear={nonlinear}", report)


def criterion_infrastructure(suite: Suite) -> None:
    grid = build_grid(16)
    traj = evolve_linear(
        random_initial_data(grid, np.random.default_rng(0)),
        build_operator(grid, 0.5),
        StepperConfig(dt=1e-3, theta=0.5),
        0.05,
    )
    back = read_trajectory(write_trajectory(traj, suite.out_dir / "roundtrip.traj"))
    suite.report("13 trajectory round trip", np.array_equal(back.values, traj.values))

    overrides = ["sweep.alpha=[0.0, 0.5]", "grid.n=16", "horizons.t_final=0.5", "horizons.t_min=0.1"]
    serial = suite.run("sweep", overrides, tag="-serial", workers=1)
    parallel = suite.run("sweep", overrides, tag="-parallel", workers=2)
    same = [row["metrics"] for row in serial.children] == [row["metrics"] for row in parallel.children]
    suite.report("13 sweep determinism", same and serial.status == "ok")

    try:
        parse_config("grid:\n  alpha: 1.2\n")
    except ConfigError as exc:
        suite.report("13 config validation", exc.key == "grid.alpha", str(exc))
    else:
        suite.report("13 config validation", False, "alpha=1.2 was accepted")


CRITERIA = {
    1: criterion_dissipativity,
    2: criterion_contraction,
    3: criterion_energy,
    4: criterion_decay,
    5: criterion_inequalities,
    6: criterion_smoothing,
    7: criterion_bounded,
    8: criterion_duhamel,
    9: criterion_periodic,
    10: criterion_quasi,
    11: criterion_almost,
    12: criterion_mms,
    13: criterion_infrastructure,
}


def main() -> int:
    parser = argparse.ArgumentParser(description="Run the acceptance criteria.")
    parser.add_argument("--only", type=int, nargs="+", choices=sorted(CRITERIA), help="criteria to run")
    parser.add_argument("--out", help="keep outputs in this directory")
    parser.add_argument("--log-level", default="WARNING")
    args = parser.parse_args()
    configure_logging(args.log_level)

    with tempfile.TemporaryDirectory() as scratch:
        suite = Suite(Path(args.out) if args.out else Path(scratch))
        suite.out_dir.mkdir(parents=True, exist_ok=True)
        for number in args.only or sorted(CRITERIA):
            logger.info("criterion %d", number)
            CRITERIA[number](suite)
    print(f"{suite.failures} failure(s)")
    return 1 if suite.failures else 0


if __name__ == "__main__":
    sys.exit(main())
