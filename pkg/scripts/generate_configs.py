#!/usr/bin/env python3
"""
Regenerate the reference experiment configurations in configs/.

Every file is validated through the same parser the CLI uses before it is
written, so a config that lands in configs/ is always runnable.

Usage:
    python scripts/generate_configs.py
"""

import math
import sys
from pathlib import Path

import yaml

# Ensure the project root is on sys.path so `kawlab` is importable.
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from kawlab.schemas.config import validate_config  # noqa: E402

CONFIG_DIR = PROJECT_ROOT / "configs"
SQRT2 = math.sqrt(2.0)

PERIODIC = {"variant": "periodic", "period": 1.0, "amplitude": 0.01}

CONFIGS = {
    "linear": {
        "experiment": {"kind": "linear", "seed": 1, "ensemble": 20},
        "grid": {"alpha": 0.5, "n": 128},
        "stepper": {"dt": 1e-3, "theta": 0.5},
        "horizons": {"t_final": 5.0},
    },
    "observability": {
        "experiment": {"kind": "observability", "seed": 2, "ensemble": 20},
        "grid": {"alpha": 0.5, "n": 64},
        "stepper": {"dt": 1e-3, "theta": 0.5},
        "horizons": {"observation": [0.5, 1.0, 2.0], "windows": 5},
    },
    "nonlinear": {
        "experiment": {"kind": "nonlinear", "seed": 3},
        "grid": {"alpha": 0.5, "n": 128},
        "stepper": {"dt": 1e-3},
        "forcing": PERIODIC,
        "horizons": {"t_final": 100.0, "stride": 10},
    },
    "duhamel": {
        "experiment": {"kind": "duhamel", "seed": 4},
        "grid": {"alpha": 0.5, "n": 64},
        "stepper": {"dt": 1e-3},
        "forcing": PERIODIC,
        "horizons": {"window": [0.0, 1.0]},
    },
    "massera_periodic": {
        "experiment": {"kind": "massera_periodic", "seed": 5},
        "grid": {"alpha": 0.5, "n": 128},
        "stepper": {"dt": 1e-3},
        "forcing": PERIODIC,
        "horizons": {"t_final": 10.0, "stride": 10},
    },
    "massera_quasi": {
        "experiment": {"kind": "massera_quasi", "seed": 6},
        "grid": {"alpha": 0.5, "n": 64},
        "stepper": {"dt": 1e-3},
        "forcing": {
            "variant": "quasi_periodic",
            "frequencies": [1.0, SQRT2],
            "torus_modes": [
                {"amplitude": 0.005, "wavevector": [1, 0]},
                {"amplitude": 0.005, "wavevector": [0, 1]},
            ],
            "phase_offset": [0.0, 0.0],
        },
        "horizons": {"window": [0.0, 2.0], "shift": 0.7},
    },
    "massera_almost": {
        "experiment": {"kind": "massera_almost", "seed": 7},
        "grid": {"alpha": 0.5, "n": 64},
        "stepper": {"dt": 1e-3},
        "forcing": {
            "variant": "almost_periodic",
            "modes": [
                {"amplitude": 0.005, "frequency": 1.0},
                {"amplitude": 0.005, "frequency": SQRT2},
            ],
        },
        "horizons": {
            "window": [0.0, 5.0],
            "stride": 10,
            "scan_length": 200.0,
            "scan_resolution": 0.01,
            "translation_samples": 10,
        },
    },
    "mms": {
        "experiment": {"kind": "mms", "seed": 8},
        "grid": {"alpha": 0.5},
        "stepper": {"theta": 0.5},
        "mms": {"refine": "both", "time_factor": "cos", "ns": [16, 32, 64], "dts": [4e-3, 2e-3, 1e-3], "t_final": 0.1},
    },
    "sweep": {
        "experiment": {"kind": "sweep", "seed": 9, "ensemble": 4},
        "grid": {"n": 64},
        "stepper": {"dt": 1e-3},
        "horizons": {"t_final": 2.0},
        "sweep": {"base": "linear", "alpha": [0.0, 0.3, 0.6, 0.9]},
    },
}


def main() -> int:
    CONFIG_DIR.mkdir(exist_ok=True)
    failures = 0
    for name, data in CONFIGS.items():
        try:
            validate_config(data)
        except Exception as exc:  # noqa: BLE001 -- report every broken config
            print(f"[FAIL] {name}: {exc}")
            failures += 1
            continue
        path = CONFIG_DIR / f"{name}.yaml"
        path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
        print(f"[OK] {path.relative_to(PROJECT_ROOT)}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
