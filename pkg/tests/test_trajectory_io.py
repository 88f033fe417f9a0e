import csv
import struct

import numpy as np
import pytest

from kawlab.core.mesh import build_grid
from kawlab.core.semigroup import Trajectory
from kawlab.exceptions import TrajectoryFileError
from kawlab.trajectory_io import MAGIC, export_csv, read_trajectory, write_trajectory


@pytest.fixture
def traj(rng):
    grid = build_grid(12)
    return Trajectory(
        grid=grid,
        t0=-0.25,
        dt=0.05,
        values=rng.standard_normal((7, grid.n)),
        left=rng.standard_normal(7),
        meta={"kind": "nonlinear", "alpha": 0.3, "forcing": {"variant": "periodic", "period": 1.0}},
    )


@pytest.fixture
def written(traj, tmp_path):
    return write_trajectory(traj, tmp_path / "sub" / "run.kawtraj")


def test_round_trip_is_bit_exact(traj, written):
    back = read_trajectory(written)
    assert back.grid == traj.grid
    assert back.t0 == traj.t0
    assert back.dt == traj.dt
    np.testing.assert_array_equal(back.values, traj.values)
    np.testing.assert_array_equal(back.left, traj.left)
    assert back.meta == traj.meta


def test_checksum_detects_corruption(written):
    blob = bytearray(written.read_bytes())
    blob[-9] ^= 0xFF
    written.write_bytes(bytes(blob))
    with pytest.raises(TrajectoryFileError, match="checksum"):
        read_trajectory(written)


def test_truncated_files_are_rejected(written):
    blob = written.read_bytes()
    written.write_bytes(blob[:-1])
    with pytest.raises(TrajectoryFileError, match="truncated"):
        read_trajectory(written)
    written.write_bytes(blob[:10])
    with pytest.raises(TrajectoryFileError, match="truncated"):
        read_trajectory(written)


def test_foreign_files_are_rejected(written):
    blob = written.read_bytes()
    written.write_bytes(b"NOTTRAJ\x00" + blob[len(MAGIC) :])
    with pytest.raises(TrajectoryFileError, match="not a trajectory"):
        read_trajectory(written)
    written.write_bytes(blob[:8] + struct.pack("<I", 99) + blob[12:])
    with pytest.raises(TrajectoryFileError, match="version"):
        read_trajectory(written)


def test_missing_file(tmp_path):
    with pytest.raises(TrajectoryFileError):
        read_trajectory(tmp_path / "absent.kawtraj")


def test_csv_export(traj, tmp_path):
    path = export_csv(traj, tmp_path / "run.csv")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == len(traj) + 1
    assert rows[0][:2] == ["t", "u1"]
    assert len(rows[0]) == traj.grid.n + 1
    assert float(rows[1][0]) == traj.t0
    assert [float(v) for v in rows[3][1:]] == traj.values[2].tolist()
