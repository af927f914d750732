from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit

from ..errors import GridMismatch


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights on ``n`` equispaced nodes.

    For even ``n`` the last interval uses the three-point parabolic
    correction ``(-1, 8, 5) h / 12``, matching ``scipy.integrate.simpson``.
    """
    if n < 3:
        raise ValueError("Simpson's rule needs at least three nodes")
    m = n if n % 2 else n - 1
    w = np.zeros(n)
    w[:m:2] = 2.0
    w[1:m:2] = 4.0
    w[0] = w[m - 1] = 1.0
    w *= h / 3.0
    if m != n:
        w[n - 3:] += np.array([-1.0, 8.0, 5.0]) * h / 12.0
    return w


@dataclass(frozen=True)
class ModelGrid:
    """Uniform grid on ``[-u_max, u_max]`` in the coordinate ``u = log(x / (1 - x))``."""

    u_max: float = 20.0
    n_points: int = 1024

    def __post_init__(self):
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 256, got {n}")
        if not self.u_max > 0:
            raise ValueError("u_max must be positive")

    @property
    def u_min(self) -> float:
        return -self.u_max

    @property
    def h(self) -> float:
        return 2.0 * self.u_max / (self.n_points - 1)

    @cached_property
    def u(self) -> np.ndarray:
        u = np.linspace(self.u_min, self.u_max, self.n_points)
        u.flags.writeable = False
        return u

    @property
    def x(self) -> np.ndarray:
        return expit(self.u)

    @cached_property
    def weights(self) -> np.ndarray:
        w = simpson_weights(self.n_points, self.h)
        w.flags.writeable = False
        return w

    def check_same(self, other: "ModelGrid"):
        if self != other:
            raise GridMismatch(f"grids differ: {self} vs {other}")

    def interior_mask(self, fraction: float = 0.5) -> np.ndarray:
        """Nodes with ``|u| <= fraction * u_max``."""
        return np.abs(self.u) <= fraction * self.u_max + 1e-12
