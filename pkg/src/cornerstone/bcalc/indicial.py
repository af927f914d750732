"""Restriction of kernels to the boundary fibers and its Fourier diagonalization.

Over each face the fiber of the groupoid is the group ``R_+^*``; in the
log coordinate ``s = u - v`` it is ``R`` and the restriction of a kernel
is a convolution kernel ``I(s)``. The transform
``I^(xi) = int e^{-i s xi} I(s) ds`` (the Mellin transform in the scale
variable) turns composition into pointwise multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import EdgeLeakage, GridMismatch, NotStabilized
from .kernel import BKernel

STABILIZATION_TOL = 1e-6
EDGE_TOL = 1e-12
PARSEVAL_TOL = 1e-8
HOMOMORPHISM_TOL = 1e-6


@dataclass(frozen=True)
class IndicialFunction:
    face: int
    s: np.ndarray
    values: np.ndarray

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    @classmethod
    def from_function(cls, face, fn, half_width=10.0, n_half=512):
        s = np.linspace(-half_width, half_width, 2 * n_half + 1)
        return cls(face, s, np.asarray(fn(s), dtype=complex))


def indicial(k: BKernel, face: int, half_width: float | None = None,
             tol: float = STABILIZATION_TOL) -> IndicialFunction:
    """Read ``I(s) = k(u_e, u_e - s)`` along the outermost rows with a full ``s`` window.

    The two outermost such rows are extrapolated linearly in the boundary
    defining function ``rho = expit(+-u)`` to ``rho = 0``, the first-order
    expansion at the face. ``half_width`` defaults to a quarter of the grid
    length and may not exceed half of it.
    """
    return _indicial(k.grid, face, lambda i, cols: k.values[i, cols], half_width, tol)


def _composite_rows(k1: BKernel, k2: BKernel):
    """Row reader of ``k1 o k2`` with the quadrature of :func:`convolve`, one row at a time."""
    if k1.grid != k2.grid:
        raise GridMismatch(f"cannot compose kernels on {k1.grid} and {k2.grid}")
    w = k1.grid.weights

    def row(i, cols):
        return (k1.values[i] * w) @ k2.values[:, cols]

    return row


def _indicial(grid, face, row_at, half_width, tol) -> IndicialFunction:
    n, h = grid.n_points, grid.h
    length = grid.u_max - grid.u_min
    if half_width is None:
        half_width = length / 4.0
    if half_width > length / 2.0 + 1e-12:
        raise ValueError("half_width exceeds half the grid length")
    M = int(np.floor(half_width / h + 1e-9))
    m = np.arange(-M, M + 1)
    if face == 0:
        i_edge, step = M, 1
    elif face == 1:
        i_edge, step = n - 1 - M, -1
    else:
        raise ValueError("face must be 0 or 1")
    sgn = 1.0 if face == 0 else -1.0
    r_out, r_in = expit(sgn * grid.u[i_edge]), expit(sgn * grid.u[i_edge + step])
    outer = row_at(i_edge, i_edge - m)
    inner = row_at(i_edge + step, i_edge + step - m)
    variation = float(np.max(np.abs(outer - inner)))
    if variation > tol:
        raise NotStabilized(f"edge rows at face {face} vary by {variation:.3e} > {tol:.1e}")
    values = outer + (outer - inner) * (r_out / (r_in - r_out))
    return IndicialFunction(face, m * h, values)


@dataclass(frozen=True)
class Spectrum:
    xi: np.ndarray
    values: np.ndarray
    parseval_defect: float


def mellin_direct(I: IndicialFunction, xi) -> np.ndarray:
    """Reference path: the trigonometric sum evaluated at arbitrary ``xi``."""
    xi = np.asarray(xi, dtype=float)
    return I.h * (np.exp(-1j * np.multiply.outer(xi, I.s)) @ np.asarray(I.values, dtype=complex))


def mellin(I: IndicialFunction, pad_factor: int = 2) -> Spectrum:
    """``int e^{-i s xi} I(s) ds`` on the FFT frequency grid (ascending ``xi``)."""
    vals = np.asarray(I.values, dtype=complex)
    scale = float(np.max(np.abs(vals), initial=0.0))
    edge = max(abs(vals[0]), abs(vals[-1]))
    if scale > 0 and edge > EDGE_TOL * scale:
        raise EdgeLeakage(f"indicial function is {edge / scale:.2e} of its peak at the window edge")
    h = I.h
    n = 1 << int(np.ceil(np.log2(pad_factor * len(vals))))
    buf = np.zeros(n, dtype=complex)
    buf[: len(vals)] = vals
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    spec = h * np.exp(-1j * xi * I.s[0]) * np.fft.fft(buf)
    order = np.argsort(xi)
    xi, spec = xi[order], spec[order]
    energy_s = h * np.sum(np.abs(vals) ** 2)
    energy_xi = (xi[1] - xi[0]) / (2.0 * np.pi) * np.sum(np.abs(spec) ** 2)
    defect = abs(energy_s - energy_xi) / max(energy_s, 1e-300)
    return Spectrum(xi, spec, float(defect))


@dataclass
class HomomorphismReport:
    defects: dict  # face -> relative sup defect
    scales: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(d <= self.tol for d in self.defects.values())


def indicial_homomorphism_check(k1: BKernel, k2: BKernel, faces=(0, 1), half_width=None,
                                tol: float = HOMOMORPHISM_TOL) -> HomomorphismReport:
    """Compare the spectrum of the restricted composite with the product of spectra.

    Only the edge rows of ``k1 o k2`` that the restriction reads are formed,
    with the same Simpson quadrature as :func:`convolve`.
    """
    composite = _composite_rows(k1, k2)
    defects, scales = {}, {}
    for face in faces:
        a = mellin(indicial(k1, face, half_width)).values
        b = mellin(indicial(k2, face, half_width)).values
        c = mellin(_indicial(k1.grid, face, composite, half_width, STABILIZATION_TOL)).values
        prod = a * b
        scale = float(np.max(np.abs(prod), initial=0.0))
        diff = float(np.max(np.abs(c - prod), initial=0.0))
        defects[face] = diff / scale if scale > 0 else diff
        scales[face] = scale
    return HomomorphismReport(defects, scales, tol)
