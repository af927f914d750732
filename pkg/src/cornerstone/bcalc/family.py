"""Equivariant families of fiber kernels versus kernels on the groupoid.

A family assigns to each unit ``w`` a kernel ``K_w(g', g'')`` on the
source fiber over ``w``, and is equivariant when
``K_w(g', g'') = K(g'' g'^{-1})`` for one kernel ``K`` on the groupoid.

* Interior fibers (the pair groupoid): ``g' = (a, w)``, ``g'' = (b, w)`` and
  ``g'' g'^{-1} = (b, a)``, so ``K_w[a, b] = K[b, a]`` for every ``w``.
* Boundary fibers (the group ``R`` in the log coordinate ``s``):
  ``K_w(s', s'') = K(s'' - s')``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NotEquivariant
from .grid import ModelGrid
from .kernel import BKernel

EQUIVARIANCE_TOL = 1e-10
PAIR = "pair"
GROUP = "group"


@dataclass(frozen=True)
class KernelFamily:
    kind: str
    fibers: tuple  # unit labels w (grid indices for PAIR, arbitrary labels for GROUP)
    matrices: tuple
    grid: ModelGrid | None = None  # PAIR
    s: np.ndarray | None = None  # GROUP: lattice s_k = k h, symmetric


def kernel_to_family(k: BKernel, fibers=None) -> KernelFamily:
    """Restrict ``k`` to interior source fibers (default: four spread-out units)."""
    n = k.grid.n_points
    if fibers is None:
        fibers = tuple(int(i) for i in np.linspace(0, n - 1, 4))
    mat = k.values.T
    return KernelFamily(PAIR, tuple(fibers), tuple(mat for _ in fibers), grid=k.grid)


def group_kernel_to_family(s, values, fibers=(0,)) -> KernelFamily:
    """Family on the boundary fiber ``R`` from a function ``K(s~)``.

    ``s`` must be a symmetric lattice ``-M h .. M h``; the family is sampled
    on the half-size block ``s', s'' in [-M h / 2, M h / 2]`` so that every
    difference lies on the lattice.
    """
    s = np.asarray(s, dtype=float)
    values = np.asarray(values)
    M = (len(s) - 1) // 2
    if len(s) != 2 * M + 1 or not np.allclose(s, -s[::-1]):
        raise ValueError("group kernels need a symmetric odd lattice")
    half = M // 2
    idx = np.arange(-half, half + 1)
    diff = idx[None, :] - idx[:, None]  # s'' - s'
    mat = values[diff + M]
    return KernelFamily(GROUP, tuple(fibers), tuple(mat for _ in fibers), s=s[M - half:M + half + 1])


def equivariance_defect(family: KernelFamily):
    """Largest discrepancy between fibers (and, for groups, from Toeplitz form)."""
    ref = family.matrices[0]
    worst, pair = 0.0, (family.fibers[0], family.fibers[0])
    for w, m in zip(family.fibers[1:], family.matrices[1:]):
        d = float(np.max(np.abs(m - ref), initial=0.0))
        if d > worst:
            worst, pair = d, (family.fibers[0], w)
    if family.kind == GROUP:
        for w, m in zip(family.fibers, family.matrices):
            n = m.shape[0]
            for offset in range(-(n - 1), n):
                diag = np.diagonal(m, offset)
                d = float(np.max(np.abs(diag - diag[0]), initial=0.0))
                if d > worst:
                    worst, pair = d, (w, w)
    return worst, pair


def family_to_kernel(family: KernelFamily, tol: float = EQUIVARIANCE_TOL):
    """Inverse of :func:`kernel_to_family` / :func:`group_kernel_to_family`.

    Returns a :class:`BKernel` for pair families and ``(s, values)`` for
    group families.
    """
    defect, pair = equivariance_defect(family)
    if defect > tol:
        raise NotEquivariant(pair, defect)
    ref = family.matrices[0]
    if family.kind == PAIR:
        return BKernel(family.grid, ref.T)
    n = ref.shape[0]
    # K(s'' - s') read off the first row and column
    vals = np.concatenate([ref[::-1, 0][:-1], ref[0, :]])
    h = family.s[1] - family.s[0]
    s = np.arange(-(n - 1), n) * h
    return s, vals
