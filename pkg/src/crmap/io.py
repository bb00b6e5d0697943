"""CSV and PGM writers.

CSV files are comma separated with a header row and LF line endings;
floats are written with ``repr`` so values round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import GridSpec


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return "" if value is None else value


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_map_csv(path, spec: GridSpec, mean, variance) -> Path:
    centers = spec.centers()
    rows = (
        (i, centers[i, 0], centers[i, 1], mean[i], variance[i]) for i in range(spec.n)
    )
    return write_csv(path, ("index", "x", "y", "mean", "variance"), rows)


def pgm_bytes(spec: GridSpec, values) -> bytes:
    """Binary P5 image of per-voxel values in [0, 1], scaled to 0..255.

    The top image row is the grid row with the largest y, so the picture
    is upright.
    """
    img = np.clip(np.rint(np.asarray(values, float) * 255.0), 0, 255).astype(np.uint8)
    img = img.reshape(spec.ny, spec.nx)[::-1]
    header = f"P5\n{spec.nx} {spec.ny}\n255\n".encode("ascii")
    return header + img.tobytes()


def write_pgm(path, spec: GridSpec, values) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(pgm_bytes(spec, values))
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, dims, maxval, pixels = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("expected an 8-bit binary PGM")
    nx, ny = (int(v) for v in dims.split())
    return np.frombuffer(pixels, dtype=np.uint8).reshape(ny, nx)
