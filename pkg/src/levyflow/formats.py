"""Bit-exact output formats: CSV, the LVF1 grid container, PGM renders,
contour exports, and the run manifest.

* CSV is RFC-4180 with '.' decimals and 17 significant digits, enough to
  round-trip any double exactly.
* LVF1 is little-endian: magic "LVF1", u32 Mx, u32 My, then Mx*My f64
  values row-major (x index outermost); 1D grids store My = 1.
* PGM is binary P5, 8 bits, with the linear map
  ``gray = floor(255 * clip((v - lo) / (hi - lo), 0, 1) + 0.5)``
  (round half up); a degenerate range renders mid-gray 128.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid
from .grids import Grid, GridField


def fmt17(value) -> str:
    """17-significant-digit decimal rendering (lossless for f64)."""
    return format(float(value), ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [fmt17(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )
    return path


# ---------------------------------------------------------------------------
# LVF1 binary grids
# ---------------------------------------------------------------------------

_LVF_MAGIC = b"LVF1"


def write_grid_binary(path, f: GridField):
    values = f.values if f.values.ndim == 2 else f.values[:, None]
    mx, my = values.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_LVF_MAGIC)
        fh.write(struct.pack("<II", mx, my))
        fh.write(values.astype("<f8").tobytes(order="C"))
    return path


def read_grid_binary(path):
    """Returns (values array, (Mx, My)); 1D payloads come back as (Mx, 1)."""
    raw = Path(path).read_bytes()
    if raw[:4] != _LVF_MAGIC:
        raise ConfigInvalid(f"{path}: not an LVF1 file")
    mx, my = struct.unpack("<II", raw[4:12])
    values = np.frombuffer(raw[12:], dtype="<f8", count=mx * my).reshape(mx, my)
    return values.copy(), (mx, my)


# ---------------------------------------------------------------------------
# PGM rendering and contour export
# ---------------------------------------------------------------------------


def render_pgm(values: np.ndarray, lo=None, hi=None) -> bytes:
    values = np.asarray(values, dtype=float)
    lo = float(values.min()) if lo is None else float(lo)
    hi = float(values.max()) if hi is None else float(hi)
    if hi <= lo:
        gray = np.full(values.shape, 128, dtype=np.uint8)
    else:
        scaled = np.clip((values - lo) / (hi - lo), 0.0, 1.0)
        gray = np.floor(255.0 * scaled + 0.5).astype(np.uint8)
    h, w = gray.shape
    return b"P5\n%d %d\n255\n" % (w, h) + gray.tobytes(order="C")


def write_pgm(path, values, lo=None, hi=None):
    Path(path).write_bytes(render_pgm(values, lo, hi))
    return Path(path)


def contour_points(f: GridField, levels):
    """Level-set crossing points on grid edges, linearly interpolated.

    Yields (level, x, y) rows suitable for overlay plotting.
    """
    grid = f.grid
    v = f.values
    xs = grid.axis_coords(0)
    ys = grid.axis_coords(1) if grid.ndim == 2 else np.zeros(1)
    vv = v if grid.ndim == 2 else v[:, None]
    rows = []
    for level in levels:
        for axis in range(vv.ndim):
            nxt = np.roll(vv, -1, axis=axis)
            lo_side = np.minimum(vv, nxt)
            hi_side = np.maximum(vv, nxt)
            crossing = (lo_side <= level) & (level < hi_side)
            frac = np.zeros_like(vv)
            span = nxt - vv
            np.divide(level - vv, span, out=frac, where=span != 0)
            for k, j in zip(*np.nonzero(crossing)):
                t = frac[k, j]
                if axis == 0:
                    x = xs[k] + t * grid.spacings[0]
                    y = ys[j]
                else:
                    x = xs[k]
                    y = ys[j] + t * grid.spacings[1]
                rows.append((float(level), float(x), float(y)))
    return rows


def write_contour_csv(path, f: GridField, levels):
    return write_csv(path, ["level", "x", "y"], contour_points(f, levels))


# ---------------------------------------------------------------------------
# run manifest
# ---------------------------------------------------------------------------


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


@dataclass
class RunManifest:
    tool_version: str
    config_text: str
    base_seed: int
    started_at: float = field(default_factory=time.time)
    finished_at: float | None = None
    outputs: list = field(default_factory=list)

    def add_output(self, path):
        path = Path(path)
        self.outputs.append({"path": path.name, "sha256": sha256_file(path)})

    def finish(self):
        self.finished_at = time.time()

    def write(self, path):
        payload = {
            "tool_version": self.tool_version,
            "config": self.config_text,
            "base_seed": self.base_seed,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "outputs": self.outputs,
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return Path(path)


def read_manifest(path):
    return json.loads(Path(path).read_text())


def verify_manifest(path) -> bool:
    """Re-hash every listed output; True when all digests still match."""
    data = read_manifest(path)
    base = Path(path).parent
    for entry in data["outputs"]:
        if sha256_file(base / entry["path"]) != entry["sha256"]:
            return False
    return True


def grid_field_from_values(grid: Grid, values) -> GridField:
    return GridField(grid, np.asarray(values))
