import numpy as np
import pytest

from kawlab.config import get_settings
from kawlab.core.mesh import build_grid
from kawlab.core.operator import build_operator
from kawlab.core.semigroup import random_initial_data


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Point the ledger and the output directory at a per-test temp dir."""
    monkeypatch.setenv("KAWLAB_DATABASE_URL", f"sqlite:///{tmp_path / 'ledger.db'}")
    monkeypatch.setenv("KAWLAB_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("KAWLAB_RECORD_RUNS", "false")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid32():
    return build_grid(32)


@pytest.fixture
def op32(grid32):
    return build_operator(grid32, 0.5)


@pytest.fixture
def smooth_field(grid32, rng):
    return random_initial_data(grid32, rng)


@pytest.fixture
def small_config(tmp_path):
    """A quick linear configuration written to disk."""
    path = tmp_path / "linear.yaml"
    path.write_text(
        "experiment:\n"
        "  kind: linear\n"
        "  seed: 3\n"
        "  ensemble: 2\n"
        "grid:\n"
        "  alpha: 0.5\n"
        "  n: 16\n"
        "stepper:\n"
        "  dt: 0.001\n"
        "horizons:\n"
        "  t_final: 0.5\n"
        "  t_min: 0.1\n"
        "  smoothing_times: [0.01, 0.1]\n",
        encoding="utf-8",
    )
    return path
