"""The b-stretched product of ``[0, 1)`` near the corner ``(0, 0)``.

Points carry the projective coordinate ``tau = (rho(x) - rho(y)) / (rho(x) + rho(y))``
and the radial coordinate ``sigma = rho(x) + rho(y)``. The front face is
``sigma = 0``; the side faces ``tau = -1`` and ``tau = +1`` are where
``x`` resp. ``y`` sits on the boundary while the other does not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CornerUndefined
from .groupoid import GroupoidElement
from .schwartz import DecayFit, decay_exponent

EDGE_TOL = 1e-12

INTERIOR = "interior"
LB = "lb"
RB = "rb"
FF = "ff"
DIAG_B = "diag_b"


def _identity(x):
    return x


@dataclass(frozen=True)
class StretchedPoint:
    tau: float
    sigma: float
    x: float | None = None
    y: float | None = None

    def __post_init__(self):
        if not -1.0 - EDGE_TOL <= self.tau <= 1.0 + EDGE_TOL:
            raise ValueError(f"tau={self.tau} outside [-1, 1]")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @classmethod
    def from_pair(cls, x: float, y: float, rho: Callable = _identity) -> "StretchedPoint":
        rx, ry = float(rho(x)), float(rho(y))
        if rx + ry <= 0:
            raise CornerUndefined("tau is undefined at the corner; supply a front-face point")
        return cls((rx - ry) / (rx + ry), rx + ry, float(x), float(y))


def tau_of_pair(x: float, y: float, rho: Callable = _identity) -> float:
    rx, ry = float(rho(x)), float(rho(y))
    if rx == 0.0 and ry == 0.0:
        raise CornerUndefined("rho(x) = rho(y) = 0")
    if rx + ry <= 0:
        raise CornerUndefined("rho(x) + rho(y) must be positive")
    return (rx - ry) / (rx + ry)


def beta_b(p: StretchedPoint) -> tuple:
    """Blow-down to ``(rho(x), rho(y))``; in the identity chart this is ``(x, y)``.

    Points that remember their pair return it unchanged. Every front-face
    point maps to the corner.
    """
    if p.x is not None and p.y is not None:
        return p.x, p.y
    return 0.5 * p.sigma * (1.0 + p.tau), 0.5 * p.sigma * (1.0 - p.tau)


@dataclass(frozen=True)
class Classification:
    labels: frozenset
    in_gamma: bool
    lam: float | None = None  # fiber coordinate on the front face

    def __contains__(self, label):
        return label in self.labels


def classify(p: StretchedPoint, tol: float = EDGE_TOL) -> Classification:
    labels = set()
    if abs(p.tau + 1.0) <= tol:
        labels.add(LB)
    if abs(p.tau - 1.0) <= tol:
        labels.add(RB)
    if abs(p.sigma) <= tol:
        labels.add(FF)
    if abs(p.tau) <= tol:
        labels.add(DIAG_B)
    if not labels & {LB, RB, FF}:
        labels.add(INTERIOR)
    in_gamma = not labels & {LB, RB}
    lam = None
    if FF in labels and in_gamma:
        lam = (1.0 + p.tau) / (1.0 - p.tau)
    return Classification(frozenset(labels), in_gamma, lam)


def embed(g: GroupoidElement, face: int = 1, rho: Callable = _identity) -> StretchedPoint:
    """Image of an element of the interval groupoid near the boundary point ``face``.

    Fiber elements over the face land on the front face with
    ``tau = (lam - 1) / (lam + 1)``; other elements keep their pair.
    """
    if face in g.lam:
        lam = abs(g.lam[face])
        return StretchedPoint((lam - 1.0) / (lam + 1.0), 0.0)
    return StretchedPoint.from_pair(g.x[0], g.y[0], rho)


def taylor_decay_check(g: Callable | None, N: int, direction: float = 1.0, sigma: float = 0.0,
                       radius: float = 40.0, num: int = 4097) -> DecayFit:
    """Decay rate in ``phi`` of ``(1 - tau^2)^N g(tau, sigma)`` pulled back by ``tau = tanh(phi / 2)``.

    ``1 - tau^2 = sech^2(phi / 2)`` behaves like ``4 e^{-|phi|}``, so the
    fitted rate should be close to ``N``.
    """

    def f(phi):
        t = np.tanh(0.5 * phi[:, 0])
        base = np.cosh(0.5 * phi[:, 0]) ** (-2.0 * N)
        return base if g is None else base * g(t, sigma)

    return decay_exponent(f, [direction], radius=radius, num=num)
