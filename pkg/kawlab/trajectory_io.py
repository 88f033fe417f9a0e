"""
Binary trajectory files and CSV export.

Layout (all little-endian)::

    fixed block   magic(8) version(u32) n(u32) h(f64) alpha(f64) dt(f64)
                  t0(f64) count(u64) meta_len(u32)
    metadata      meta_len bytes of UTF-8 JSON (forcing echo, scheme, seed...)
    payload       count*n snapshot values, then count left-boundary values (f64)
    checksum      8-byte blake2b digest of the payload

Reading a file written by :func:`write_trajectory` reproduces every array bit
for bit.
"""

import csv
import hashlib
import json
import logging
import struct
from pathlib import Path

import numpy as np

from kawlab.core.mesh import build_grid
from kawlab.core.semigroup import Trajectory
from kawlab.exceptions import TrajectoryFileError

logger = logging.getLogger(__name__)

MAGIC = b"KAWTRAJ\x00"
VERSION = 1
_FIXED = struct.Struct("<8sII4dQI")
_CHECKSUM_SIZE = 8
_DTYPE = np.dtype("<f8")


def _checksum(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=_CHECKSUM_SIZE).digest()


def write_trajectory(traj: Trajectory, path: Path | str) -> Path:
    path = Path(path)
    meta = json.dumps(traj.meta, sort_keys=True, default=float).encode("utf-8")
    count = len(traj)
    alpha = float(traj.meta.get("alpha", 0.0))
    fixed = _FIXED.pack(
        MAGIC, VERSION, traj.grid.n, traj.grid.h, alpha, traj.dt, traj.t0, count, len(meta)
    )
    payload = (
        np.ascontiguousarray(traj.values, dtype=_DTYPE).tobytes()
        + np.ascontiguousarray(traj.left, dtype=_DTYPE).tobytes()
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(fixed)
        fh.write(meta)
        fh.write(payload)
        fh.write(_checksum(payload))
    logger.info("wrote %d snapshots to %s", count, path)
    return path


def read_trajectory(path: Path | str) -> Trajectory:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise TrajectoryFileError(f"cannot read {path}: {exc}", stage="trajectory_io") from exc

    if len(blob) < _FIXED.size:
        raise TrajectoryFileError(f"{path} is truncated (no header)", stage="trajectory_io")
    magic, version, n, h, _alpha, dt, t0, count, meta_len = _FIXED.unpack_from(blob)
    if magic != MAGIC:
        raise TrajectoryFileError(f"{path} is not a trajectory file", stage="trajectory_io")
    if version != VERSION:
        raise TrajectoryFileError(
            f"{path} has format version {version}, expected {VERSION}", stage="trajectory_io"
        )

    start = _FIXED.size + meta_len
    payload_size = count * (n + 1) * _DTYPE.itemsize
    if len(blob) != start + payload_size + _CHECKSUM_SIZE:
        raise TrajectoryFileError(
            f"{path} is truncated: expected {start + payload_size + _CHECKSUM_SIZE} bytes, "
            f"found {len(blob)}",
            stage="trajectory_io",
        )
    payload = blob[start : start + payload_size]
    if _checksum(payload) != blob[start + payload_size :]:
        raise TrajectoryFileError(f"{path} failed its checksum", stage="trajectory_io")

    meta = json.loads(blob[_FIXED.size : start].decode("utf-8"))
    grid = build_grid(n)
    if grid.h != h:
        raise TrajectoryFileError(f"{path} records h={h!r} inconsistent with n={n}", stage="trajectory_io")
    data = np.frombuffer(payload, dtype=_DTYPE)
    values = data[: count * n].reshape(count, n).astype(float)
    left = data[count * n :].astype(float)
    return Trajectory(grid=grid, t0=t0, dt=dt, values=values, left=left, meta=meta)


def export_csv(traj: Trajectory, path: Path | str) -> Path:
    """One row per snapshot: time then the n nodal values, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"u{i}" for i in range(1, traj.grid.n + 1)])
        for t, row in zip(traj.times, traj.values):
            writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
    logger.info("exported %d rows to %s", len(traj), path)
    return path
