"""End-to-end acquisition pipeline: transform, coordinatize, select.

The operator maps a frequency-domain hypercomplex array to the vector of
real samples a schedule acquires.  Rows are ordered pixel row-major with
component indices ascending inside a pixel, so the measurement layout is
reproducible.  Because the transform-plus-coordinatization factor is a
real orthogonal matrix, the operator's rows are orthonormal; the adjoint
is the inverse transform of the zero-padded measurement vector.
"""

from __future__ import annotations

import csv

import numpy as np

from .schedules import SamplingSchedule
from .transform import HyperArray, _transform_data

__all__ = [
    "AcquisitionOperator",
    "coordinatize",
    "decoordinatize",
    "apply",
    "adjoint_apply",
    "dense_matrix",
    "export_measurements_csv",
]

DENSE_COLUMN_CAP = 65536


class AcquisitionOperator:
    """Selection of scheduled (pixel, component) samples after transform."""

    def __init__(self, schedule: SamplingSchedule):
        self.schedule = schedule
        self.dims = schedule.dims
        self.d = schedule.d
        self.nc = schedule.ncomp
        self.masks = schedule.masks()
        # flat positions into the coordinatized vector, pixel-major with the
        # component index fastest
        pixel_major = np.moveaxis(self.masks, 0, -1).reshape(-1)
        self.flat_rows = np.flatnonzero(pixel_major)

    @property
    def n(self) -> int:
        return int(self.flat_rows.size)

    @property
    def ncols(self) -> int:
        return int(np.prod(self.dims)) * self.nc

    @property
    def row_index(self) -> list:
        """Ordered (pixel tuple, component) pair per measurement row."""
        pixels = [np.unravel_index(f // self.nc, self.dims) for f in self.flat_rows]
        return [
            (tuple(int(i) for i in p), int(f % self.nc))
            for p, f in zip(pixels, self.flat_rows)
        ]

    def __repr__(self) -> str:
        return f"AcquisitionOperator(dims={self.dims}, n={self.n}, ncols={self.ncols})"


def coordinatize(x: HyperArray) -> np.ndarray:
    """Concatenated coefficient vectors in pixel row-major order."""
    return x.data.reshape(-1).copy()

def decoordinatize(vec: np.ndarray, dims) -> HyperArray:
    dims = tuple(int(t) for t in dims)
    nc = 1 << len(dims)
    vec = np.asarray(vec, dtype=float)
    if vec.size != int(np.prod(dims)) * nc:
        raise ValueError(f"vector of size {vec.size} does not fit dims {dims}")
    return HyperArray(dims, vec.reshape(dims + (nc,)))


def apply(op: AcquisitionOperator, x: HyperArray) -> np.ndarray:
    """Measurement vector: scheduled components of the transformed input."""
    if x.dims != op.dims:
        raise ValueError(f"array dims {x.dims} do not match operator dims {op.dims}")
    transformed = _transform_data(x.data, op.dims, +1.0)
    return transformed.reshape(-1)[op.flat_rows]


def adjoint_apply(op: AcquisitionOperator, y: np.ndarray) -> HyperArray:
    """Transpose action: zero-fill the measurements, undo the transform."""
    y = np.asarray(y, dtype=float)
    if y.shape != (op.n,):
        raise ValueError(f"expected measurement vector of length {op.n}, got shape {y.shape}")
    flat = np.zeros(op.ncols)
    flat[op.flat_rows] = y
    data = flat.reshape(op.dims + (op.nc,))
    return HyperArray(op.dims, _transform_data(data, op.dims, -1.0))


def dense_matrix(op: AcquisitionOperator, column_cap: int = DENSE_COLUMN_CAP) -> np.ndarray:
    """Explicit matrix built column-by-column through the implicit operator."""
    ncols = op.ncols
    if ncols > column_cap:
        raise ValueError(f"dense matrix would need {ncols} columns, cap is {column_cap}")
    out = np.empty((op.n, ncols))
    chunk = 512
    for start in range(0, ncols, chunk):
        stop = min(start + chunk, ncols)
        batch = np.zeros((stop - start, ncols))
        batch[np.arange(stop - start), np.arange(start, stop)] = 1.0
        batch = batch.reshape((stop - start,) + op.dims + (op.nc,))
        transformed = _transform_data(batch, op.dims, +1.0)
        out[:, start:stop] = transformed.reshape(stop - start, -1)[:, op.flat_rows].T
    return out


def export_measurements_csv(op: AcquisitionOperator, y: np.ndarray, path) -> None:
    """Debug dump of a measurement vector with its row coordinates."""
    y = np.asarray(y, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"t_{j}" for j in range(1, op.d + 1)] + ["component", "value"])
        for (pixel, comp), value in zip(op.row_index, y):
            writer.writerow(list(pixel) + [comp, repr(float(value))])
