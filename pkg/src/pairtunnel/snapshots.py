"""Field snapshots: raw little-endian intensity dumps with a JSON sidecar.

Each snapshot is |psi|^2 as row-major float64 (x1 along rows) in
`<base>.f64`, described by `<base>.json`; an optional 16-bit PGM
(`<base>.pgm`, intensity linearly scaled to [0, 65535]) gives a quick look
without any tooling.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import ComplexField2D, Grid2D

__all__ = ["write_snapshot", "read_snapshot"]

SNAPSHOT_FORMAT = "f64-le-rowmajor"


def _intensity(field) -> np.ndarray:
    if isinstance(field, ComplexField2D):
        return (field.values.real ** 2 + field.values.imag ** 2)
    return np.asarray(field, dtype=np.float64)


def write_snapshot(field, grid: Grid2D, base_path, z_mm: float = 0.0,
                   pgm: bool = False) -> dict[str, Path]:
    """Write `<base>.f64` + `<base>.json` (+ `<base>.pgm`); returns the paths."""
    intensity = _intensity(field)
    if intensity.shape != (grid.n, grid.n):
        raise ValueError("snapshot shape does not match grid")
    base = Path(base_path)
    base.parent.mkdir(parents=True, exist_ok=True)

    # suffixes are appended (not substituted): stems may contain dots
    raw_path = base.parent / (base.name + ".f64")
    raw_path.write_bytes(np.ascontiguousarray(intensity, dtype="<f8").tobytes())

    sidecar_path = base.parent / (base.name + ".json")
    sidecar_path.write_text(json.dumps({
        "n": grid.n,
        "half_width_um": grid.half_width,
        "z_mm": z_mm,
        "format": SNAPSHOT_FORMAT,
    }, indent=2) + "\n")

    paths = {"raw": raw_path, "sidecar": sidecar_path}
    if pgm:
        peak = float(intensity.max())
        scaled = np.zeros_like(intensity) if peak == 0 else intensity / peak * 65535.0
        pixels = np.round(scaled).astype(">u2")
        pgm_path = base.parent / (base.name + ".pgm")
        with open(pgm_path, "wb") as fh:
            fh.write(f"P5\n{grid.n} {grid.n}\n65535\n".encode("ascii"))
            fh.write(pixels.tobytes())
        paths["pgm"] = pgm_path
    return paths


def read_snapshot(base_path) -> tuple[np.ndarray, dict]:
    """Read back a snapshot written by write_snapshot."""
    base = Path(base_path)
    meta = json.loads((base.parent / (base.name + ".json")).read_text())
    if meta.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"unsupported snapshot format: {meta.get('format')!r}")
    n = int(meta["n"])
    data = np.frombuffer((base.parent / (base.name + ".f64")).read_bytes(), dtype="<f8")
    if data.size != n * n:
        raise ValueError("snapshot payload size does not match sidecar")
    return data.reshape(n, n).copy(), meta
