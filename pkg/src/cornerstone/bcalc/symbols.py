"""Polyhomogeneous symbols and smooth cutoffs."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

HOMOGENEITY_TOL = 1e-10


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def plateau_cutoff(s, width: float | None):
    """1 on ``|s| <= width / 2``, smoothly 0 at ``|s| >= width``.

    ``width=None`` is the constant function 1.
    """
    s = np.asarray(s, dtype=float)
    if width is None or math.isinf(width):
        return np.ones_like(s)
    half = 0.5 * width
    return 1.0 - smooth_step((np.abs(s) - half) / half)


def excision(xi):
    """0 on ``|xi| <= 1/2``, 1 on ``|xi| >= 1``."""
    return smooth_step(2.0 * np.abs(np.asarray(xi, dtype=float)) - 1.0)


class Symbol:
    """Symbol ``a(u, xi)`` of order ``m``.

    For finite ``m`` the components ``a_{m-j}`` are homogeneous of degree
    ``m - j`` in ``xi`` on ``|xi| >= 1`` and the full symbol is their sum
    times :func:`excision`. For ``m = -inf`` a single component is the
    full symbol, assumed Schwartz in ``xi``.
    """

    def __init__(self, order: float, components: Sequence[Callable], check: bool = True):
        if not components:
            raise ValueError("a symbol needs at least one component")
        if math.isinf(order) and order > 0:
            raise ValueError("order must be finite or -inf")
        if not math.isinf(order) and order != int(order):
            raise ValueError("orders are integers")
        self.order = float(order)
        self.components = tuple(components)
        if check and not self.smoothing:
            defect = self.homogeneity_defect()
            if defect > HOMOGENEITY_TOL:
                raise ValueError(f"components are not homogeneous (defect {defect:.2e})")

    @property
    def smoothing(self) -> bool:
        return math.isinf(self.order)

    @classmethod
    def smooth(cls, fn: Callable) -> "Symbol":
        return cls(-math.inf, [fn])

    def __call__(self, u, xi):
        u = np.asarray(u, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(u.shape, xi.shape)
        total = np.zeros(shape, dtype=complex)
        if self.smoothing:
            return total + self.components[0](u, xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            for a in self.components:
                total = total + a(u, xi)
        return np.where(np.abs(xi) >= 0.5, total, 0.0) * excision(xi)

    def homogeneity_defect(self, u=(-1.0, 0.0, 1.5), xi=(-3.0, -1.0, 1.0, 1.7, 4.0), t=(1.0, 2.0, 3.5)) -> float:
        """Max relative defect of ``a_{m-j}(u, t xi) = t^{m-j} a_{m-j}(u, xi)``."""
        if self.smoothing:
            return 0.0
        U, X, T = np.meshgrid(np.asarray(u, float), np.asarray(xi, float), np.asarray(t, float), indexing="ij")
        worst = 0.0
        for j, a in enumerate(self.components):
            deg = self.order - j
            lhs = np.asarray(a(U, T * X), dtype=complex)
            rhs = T ** deg * np.asarray(a(U, X), dtype=complex)
            scale = np.maximum(1.0, np.abs(rhs))
            worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
        return worst


def gaussian_symbol(width: float = 1.0, amplitude: Callable | None = None, shift: float = 0.0) -> Symbol:
    """``c(u) exp(-width^2 xi^2 / 2) exp(-i shift xi)``; kernel is a Gaussian centred at ``u - v = shift``."""

    def a(u, xi):
        c = 1.0 if amplitude is None else amplitude(u)
        return c * np.exp(-0.5 * (width * xi) ** 2 - 1j * shift * xi)

    return Symbol.smooth(a)


def classical_symbol(order: int, amplitude: Callable | None = None) -> Symbol:
    """Elliptic classical symbol ``c(u) |xi|^order`` (excised near 0)."""

    def a(u, xi):
        c = 1.0 if amplitude is None else amplitude(u)
        return c * np.abs(xi) ** order

    return Symbol(order, [a])
