import math

import numpy as np
import pytest

from cornerstone.bcalc import (
    BDifferentialOperator,
    BKernel,
    ModelGrid,
    Symbol,
    apply,
    apply_diff,
    b_derivative,
    classical_symbol,
    compose_diff_kernel,
    compose_kernel_diff,
    convolve,
    gaussian_symbol,
    identity_kernel,
    quantize,
    translation_kernel,
)
from cornerstone.bcalc.symbols import excision, plateau_cutoff, smooth_step
from cornerstone.errors import GridMismatch, OrderTooHigh


def gauss(grid, width=1.0):
    return translation_kernel(grid, lambda s: np.exp(-0.5 * (s / width) ** 2))


def test_quantize_gaussian_symbol(grid1024):
    k = quantize(gaussian_symbol(), None, grid1024)
    exact = BKernel.from_function(grid1024, lambda u, v: np.exp(-0.5 * (u - v) ** 2) / math.sqrt(2 * math.pi))
    assert k.sup_distance(exact) <= 1e-12


def test_quantize_scales_rows(grid512):
    c = lambda u: 2.0 + np.tanh(u)
    k = quantize(gaussian_symbol(amplitude=c), None, grid512)
    base = quantize(gaussian_symbol(), None, grid512)
    np.testing.assert_allclose(k.values, c(grid512.u)[:, None] * base.values, atol=1e-14)


def test_quantize_is_linear(grid512):
    a, b = gaussian_symbol(width=0.7), gaussian_symbol(width=1.3, shift=0.4)
    s = Symbol.smooth(lambda u, xi: 2 * a(u, xi) - 1j * b(u, xi))
    lhs = quantize(s, 6.0, grid512)
    rhs = quantize(a, 6.0, grid512) * 2 - quantize(b, 6.0, grid512) * 1j
    assert lhs.sup_distance(rhs) <= 1e-13


def test_real_even_symbol_gives_self_adjoint_kernel(grid512):
    k = quantize(Symbol.smooth(lambda u, xi: np.exp(-0.5 * xi**2) * (1 + xi**2)), 8.0, grid512)
    assert k.sup_distance(k.adjoint()) <= 1e-10


def test_cutoff_limits_support(grid512):
    k = quantize(gaussian_symbol(), 3.0, grid512)
    U, V = np.meshgrid(grid512.u, grid512.u, indexing="ij")
    assert np.all(k.values[np.abs(U - V) >= 3.0] == 0)


def test_order_too_high_is_refused(grid512):
    with pytest.raises(OrderTooHigh):
        quantize(classical_symbol(0), 4.0, grid512)
    quantize(classical_symbol(-2), 4.0, grid512)


def test_symbol_homogeneity_is_checked():
    with pytest.raises(ValueError):
        Symbol(-2, [lambda u, xi: np.abs(xi) ** -2 + 1.0])
    assert classical_symbol(-3).homogeneity_defect() <= 1e-12


def test_cutoffs():
    assert smooth_step(-1.0) == 0 and smooth_step(2.0) == 1
    assert plateau_cutoff(0.4, 1.0) == 1 and plateau_cutoff(1.0, 1.0) == 0
    assert 0 < plateau_cutoff(0.75, 1.0) < 1
    assert excision(0.2) == 0 and excision(3.0) == 1


def test_gaussian_convolution_oracle(grid1024):
    gg = convolve(gauss(grid1024), gauss(grid1024))
    exact = BKernel.from_function(grid1024, lambda u, w: math.sqrt(math.pi) * np.exp(-0.25 * (u - w) ** 2))
    assert gg.sup_distance(exact, grid1024.interior_mask()) <= 1e-8


def test_near_delta_is_second_order(grid512):
    k = gauss(grid512, 1.5)
    m = grid512.interior_mask()
    errs = []
    for cells in (4.0, 2.0):
        errs.append(convolve(identity_kernel(grid512, cells), k).sup_distance(k, m))
    assert errs[1] < errs[0] / 3


def test_apply_and_convolve_agree(grid512):
    a, b = gauss(grid512, 0.8), translation_kernel(grid512, lambda s: np.exp(-s**2) * (1 + s))
    f = np.exp(-grid512.u ** 2 / 50)
    lhs = apply(convolve(a, b), f)
    rhs = apply(a, apply(b, f))
    assert np.max(np.abs(lhs - rhs)) <= 1e-7


def test_convolve_grid_mismatch(grid512, grid1024):
    with pytest.raises(GridMismatch):
        convolve(gauss(grid512), gauss(grid1024))


def test_d_u_fourth_order():
    errs = []
    for n in (256, 512):
        g = ModelGrid(5.0, n)
        f = np.exp(1j * g.u)
        errs.append(np.max(np.abs(apply_diff(b_derivative(1), f, g) - 1j * f)))
    assert errs[0] / errs[1] > 12.0
    assert errs[1] < 1e-6


def test_differential_operator_coefficients(grid512):
    D = BDifferentialOperator([lambda u: u, 0.0, 2.0])
    f = np.sin(grid512.u)
    got = apply_diff(D, f, grid512)
    m = grid512.interior_mask(0.9)
    np.testing.assert_allclose(got[m], (grid512.u * f - 2 * f)[m], atol=1e-5)
    assert D.order == 2 and not D.is_zero and BDifferentialOperator([0.0]).is_zero


def test_left_and_right_composition_with_derivative(grid512):
    k = translation_kernel(grid512, lambda s: np.exp(-0.5 * s**2))
    left = compose_diff_kernel(b_derivative(1), k)
    right = compose_kernel_diff(k, b_derivative(1))
    m = np.outer(grid512.interior_mask(0.5), grid512.interior_mask(0.5))
    # for a translation kernel d_u k(u - v) = -d_v k(u - v), so D k = k D
    assert np.max(np.abs(left.values - right.values)[m]) <= 1e-5
