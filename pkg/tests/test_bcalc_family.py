import numpy as np
import pytest

from cornerstone.bcalc import (
    BKernel,
    equivariance_defect,
    family_to_kernel,
    group_kernel_to_family,
    kernel_to_family,
)
from cornerstone.bcalc.family import KernelFamily, PAIR
from cornerstone.errors import NotEquivariant


def test_pair_round_trip_exact(grid512):
    k = BKernel.from_function(grid512, lambda u, v: np.exp(-(u - v) ** 2 - 0.1 * u**2) + 1j * v)
    fam = kernel_to_family(k)
    assert equivariance_defect(fam)[0] == 0.0
    np.testing.assert_array_equal(family_to_kernel(fam).values, k.values)


def test_pair_fiber_convention(grid512):
    k = BKernel.from_function(grid512, lambda u, v: u + 10 * v)
    fam = kernel_to_family(k, fibers=(3,))
    a, b = 5, 7
    assert fam.matrices[0][a, b] == k.values[b, a]


def test_group_round_trip():
    s = np.arange(-40, 41) * 0.1
    vals = np.exp(-s**2) * (1 + 0.3 * s)
    fam = group_kernel_to_family(s, vals, fibers=("a", "b"))
    assert equivariance_defect(fam)[0] == 0.0
    s2, v2 = family_to_kernel(fam)
    mid = (len(s) - 1) // 2
    half = (len(s2) - 1) // 2
    np.testing.assert_array_equal(v2, vals[mid - half: mid + half + 1])
    np.testing.assert_allclose(s2, s[mid - half: mid + half + 1])


def test_non_equivariant_family_reports_defect(grid512):
    g = np.exp(-np.subtract.outer(grid512.u[:50], grid512.u[:50]) ** 2)
    ws = (1.0, 2.0, 3.0)
    fam = KernelFamily(PAIR, ws, tuple(w * g for w in ws), grid=grid512)
    with pytest.raises(NotEquivariant) as exc:
        family_to_kernel(fam)
    assert exc.value.defect == pytest.approx(2.0 * np.max(np.abs(g)))
