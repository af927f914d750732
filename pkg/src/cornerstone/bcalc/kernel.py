"""Gridded kernels and their on-disk container.

Binary layout (little-endian)::

    b"BKER1" | u_max: f64 | n_points: i64 | ndim: i64 | values: complex128, row-major

``ndim`` is 2 for kernels and 1 for gridded functions. ``decay_meta`` for
kernels lives in a JSON sidecar next to the binary file.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .grid import ModelGrid

MAGIC = b"BKER1"
HALF_DENSITY = "|du|^{1/2} ⊗ |dv|^{1/2}"
_HEADER = struct.Struct("<5sdqq")


class BKernel:
    """Kernel ``k(u, v)`` sampled on ``grid x grid``.

    Half-densities are trivialized once and for all by the tag in
    :attr:`density_trivialization`, so values are plain complex scalars.
    """

    __slots__ = ("grid", "values", "decay_meta")

    def __init__(self, grid: ModelGrid, values, decay_meta=None):
        values = np.array(values, dtype=complex)
        n = grid.n_points
        if values.shape != (n, n):
            raise ValueError(f"kernel values must have shape {(n, n)}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("kernel values must be finite")
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self.decay_meta = dict(decay_meta) if decay_meta else None

    @property
    def density_trivialization(self) -> str:
        return HALF_DENSITY

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def adjoint(self) -> "BKernel":
        return BKernel(self.grid, self.values.conj().T)

    def with_meta(self, meta) -> "BKernel":
        return BKernel(self.grid, self.values, meta)

    def __add__(self, other: "BKernel") -> "BKernel":
        self.grid.check_same(other.grid)
        return BKernel(self.grid, self.values + other.values)

    def __sub__(self, other: "BKernel") -> "BKernel":
        self.grid.check_same(other.grid)
        return BKernel(self.grid, self.values - other.values)

    def __mul__(self, c) -> "BKernel":
        return BKernel(self.grid, self.values * c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"BKernel(n={self.grid.n_points}, u_max={self.grid.u_max})"

    @classmethod
    def from_function(cls, grid: ModelGrid, fn) -> "BKernel":
        u = grid.u
        return cls(grid, fn(u[:, None], u[None, :]))

    @classmethod
    def zeros(cls, grid: ModelGrid) -> "BKernel":
        return cls(grid, np.zeros((grid.n_points, grid.n_points)))

    def sup_distance(self, other: "BKernel", mask=None) -> float:
        self.grid.check_same(other.grid)
        d = np.abs(self.values - other.values)
        if mask is not None:
            d = d[np.ix_(mask, mask)]
        return float(d.max(initial=0.0))


def _write_atomic(path: Path, data: bytes):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _pack(grid: ModelGrid, values: np.ndarray) -> bytes:
    header = _HEADER.pack(MAGIC, grid.u_max, grid.n_points, values.ndim)
    return header + np.ascontiguousarray(values, dtype="<c16").tobytes()


def _unpack(data: bytes):
    if len(data) < _HEADER.size:
        raise ValueError("truncated BKER1 container")
    magic, u_max, n, ndim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if ndim not in (1, 2):
        raise ValueError(f"unsupported ndim {ndim}")
    shape = (n,) * ndim
    body = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if body.size != n ** ndim:
        raise ValueError("payload size does not match header")
    return ModelGrid(u_max, n), body.reshape(shape).astype(complex)


def save_kernel(path, k: BKernel):
    path = Path(path)
    _write_atomic(path, _pack(k.grid, k.values))
    sidecar = path.with_name(path.name + ".json")
    _write_atomic(sidecar, json.dumps({"decay_meta": k.decay_meta}, sort_keys=True).encode())


def load_kernel(path) -> BKernel:
    path = Path(path)
    grid, values = _unpack(path.read_bytes())
    if values.ndim != 2:
        raise ValueError("container holds a function, not a kernel")
    sidecar = path.with_name(path.name + ".json")
    meta = json.loads(sidecar.read_text())["decay_meta"] if sidecar.exists() else None
    return BKernel(grid, values, meta)


def save_function(path, grid: ModelGrid, f):
    f = np.asarray(f, dtype=complex)
    if f.shape != (grid.n_points,):
        raise ValueError("function must be sampled on the grid")
    _write_atomic(Path(path), _pack(grid, f))


def load_function(path):
    grid, values = _unpack(Path(path).read_bytes())
    if values.ndim != 1:
        raise ValueError("container holds a kernel, not a function")
    return grid, values
