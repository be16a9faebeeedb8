"""Tunneling traces: sampled z -> (p_R, p_2, norm, symmetry error) series.

Both the full-wave propagator and the reduced five-amplitude model emit the
same structure, so traces from the two models can be compared, classified
and serialized identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["TunnelingTrace", "write_trace_csv", "read_trace_csv"]

CSV_HEADER = "z_mm,p_R,p_2,norm,sym_err"


@dataclass
class TunnelingTrace:
    """Observable series along propagation; z in mm, fractions of unit power."""

    z_mm: np.ndarray
    p_r: np.ndarray
    p_2: np.ndarray
    norm: np.ndarray
    sym_err: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=np.float64) for a in
                  (self.z_mm, self.p_r, self.p_2, self.norm, self.sym_err)]
        n = arrays[0].size
        if any(a.shape != (n,) for a in arrays):
            raise ValueError("trace columns must be 1D arrays of equal length")
        if n == 0:
            raise ValueError("trace must contain at least one sample")
        if arrays[0][0] != 0.0 or np.any(np.diff(arrays[0]) <= 0):
            raise ValueError("z must increase strictly from 0")
        self.z_mm, self.p_r, self.p_2, self.norm, self.sym_err = arrays

    def __len__(self) -> int:
        return self.z_mm.size


def write_trace_csv(trace: TunnelingTrace, path) -> Path:
    """Write the trace with 12 significant digits per value."""
    path = Path(path)
    rows = [CSV_HEADER]
    for vals in zip(trace.z_mm, trace.p_r, trace.p_2, trace.norm, trace.sym_err):
        rows.append(",".join(f"{v:.12g}" for v in vals))
    path.write_text("\n".join(rows) + "\n")
    return path


def read_trace_csv(path) -> TunnelingTrace:
    """Read a trace written by write_trace_csv (metadata is not stored)."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"not a tunneling trace CSV (bad header): {path}")
    data = np.array([[float(tok) for tok in line.split(",")] for line in lines[1:]])
    if data.ndim != 2 or data.shape[1] != 5:
        raise ValueError(f"malformed trace CSV: {path}")
    return TunnelingTrace(*(data[:, i] for i in range(5)))
