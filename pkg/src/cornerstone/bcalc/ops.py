"""Quantization, convolution and differential operators on the model grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import GridMismatch, OrderTooHigh
from .grid import ModelGrid
from .kernel import BKernel
from .symbols import Symbol, plateau_cutoff

ROW_CHUNK = 256


def quantize(sym: Symbol, cutoff_width: float | None, grid: ModelGrid) -> BKernel:
    """Kernel ``chi(u - v) (2 pi)^-1 int e^{i (u - v) xi} a(u, xi) d xi``.

    Each row is one inverse FFT of length ``2 n`` on the frequency grid
    dual to the spatial grid, so every offset ``u_i - u_j`` is a lattice
    point and frequencies are truncated at ``|xi| <= pi / h``.
    """
    if not sym.smoothing and sym.order > -1:
        raise OrderTooHigh(f"order {sym.order:g} > -1; use a b-differential operator instead")
    n, h = grid.n_points, grid.h
    n2 = 2 * n
    xi = 2.0 * np.pi * np.fft.fftfreq(n2, d=h)
    m = np.arange(n2)
    offsets = np.where(m < n, m, m - n2) * h
    chi = plateau_cutoff(offsets, cutoff_width)
    u = grid.u
    cols = np.arange(n)
    out = np.empty((n, n), dtype=complex)
    for start in range(0, n, ROW_CHUNK):
        rows = np.arange(start, min(start + ROW_CHUNK, n))
        spectrum = sym(u[rows, None], xi[None, :])
        k_rows = np.fft.ifft(spectrum, axis=1) / h
        idx = (rows[:, None] - cols[None, :]) % n2
        out[rows] = np.take_along_axis(k_rows, idx, axis=1) * chi[idx]
    return BKernel(grid, out)


def _matmul_weighted(a: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not np.any(a.imag) and not np.any(b.imag):
        ar = np.ascontiguousarray(a.real)
        br = np.ascontiguousarray(w[:, None] * b.real)
        return (ar @ br).astype(complex)
    return np.ascontiguousarray(a) @ np.ascontiguousarray(w[:, None] * b)


def convolve(k1: BKernel, k2: BKernel) -> BKernel:
    """``(k1 o k2)(u, w) = int k1(u, v) k2(v, w) dv`` by composite Simpson."""
    if k1.grid != k2.grid:
        raise GridMismatch(f"cannot compose kernels on {k1.grid} and {k2.grid}")
    return BKernel(k1.grid, _matmul_weighted(k1.values, k1.grid.weights, k2.values))


def apply(k: BKernel, f) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (k.grid.n_points,):
        raise GridMismatch("function is not sampled on the kernel grid")
    return k.values @ (k.grid.weights * f)


def identity_kernel(grid: ModelGrid, cells: float = 2.0) -> BKernel:
    """Near-delta: Gaussian of width ``cells * h``, rows normalized to unit mass."""
    eps = cells * grid.h
    u = grid.u
    g = np.exp(-0.5 * ((u[:, None] - u[None, :]) / eps) ** 2)
    g /= (g @ grid.weights)[:, None]
    return BKernel(grid, g)


def translation_kernel(grid: ModelGrid, profile: Callable, amplitude: Callable | None = None) -> BKernel:
    """``c(u) g(u - v)`` on the grid."""
    u = grid.u
    vals = profile(u[:, None] - u[None, :])
    if amplitude is not None:
        vals = amplitude(u)[:, None] * vals
    return BKernel(grid, vals)


# -- b-differential operators ------------------------------------------------

def d_u(f: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Fourth-order finite-difference derivative, one-sided at both ends."""
    f = np.moveaxis(np.asarray(f), axis, 0)
    n = f.shape[0]
    if n < 5:
        raise ValueError("need at least five nodes")
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[2:-2] = f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]
    out[0] = -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]
    out[1] = -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]
    out[-2] = 3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]
    out[-1] = 25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]
    out /= 12.0 * h
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class BDifferentialOperator:
    """``sum_j a_j(u) d_u^j`` with ``d_u = x (1 - x) d_x``.

    Coefficients are callables of ``u`` or constants.
    """

    coefficients: Sequence

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def coefficient_values(self, grid: ModelGrid) -> list:
        out = []
        for a in self.coefficients:
            out.append(np.broadcast_to(a(grid.u) if callable(a) else np.asarray(a, dtype=complex), grid.u.shape))
        return out

    @property
    def is_zero(self) -> bool:
        return all((not callable(a)) and a == 0 for a in self.coefficients)


def b_derivative(power: int = 1) -> BDifferentialOperator:
    return BDifferentialOperator([0.0] * power + [1.0])


def _apply_along(D: BDifferentialOperator, arr: np.ndarray, grid: ModelGrid, axis: int) -> np.ndarray:
    coeffs = D.coefficient_values(grid)
    shape = [1] * arr.ndim
    shape[axis] = -1
    out = np.zeros(arr.shape, dtype=complex)
    term = np.asarray(arr, dtype=complex)
    for j, a in enumerate(coeffs):
        if j:
            term = d_u(term, grid.h, axis=axis)
        if np.any(a):
            out += np.reshape(a, shape) * term
    return out


def apply_diff(D: BDifferentialOperator, f, grid: ModelGrid) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (grid.n_points,):
        raise GridMismatch("function is not sampled on the grid")
    return _apply_along(D, f, grid, axis=0)


def compose_diff_kernel(D: BDifferentialOperator, k: BKernel) -> BKernel:
    """``D o k``: ``D`` acts on the first variable."""
    return BKernel(k.grid, _apply_along(D, k.values, k.grid, axis=0))


def compose_kernel_diff(k: BKernel, D: BDifferentialOperator) -> BKernel:
    """``k o D``: the formal transpose ``sum_j (-d_w)^j (a_j(w) .)`` acts on the second variable."""
    grid = k.grid
    coeffs = D.coefficient_values(grid)
    out = np.zeros(k.values.shape, dtype=complex)
    for j, a in enumerate(coeffs):
        if not np.any(a):
            continue
        term = k.values * a[None, :]
        for _ in range(j):
            term = -d_u(term, grid.h, axis=1)
        out += term
    return BKernel(grid, out)
