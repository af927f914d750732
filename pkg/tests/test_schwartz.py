import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerstone.bcalc import BKernel, convolve, gaussian_symbol, quantize
from cornerstone.errors import GridMismatch, InsufficientDecay
from cornerstone.schwartz import (
    WeightPolynomial,
    decay_exponent,
    fit_decay_rate,
    gamma_grid,
    is_s0,
    is_s0_kernel,
    kernel_samples,
    monomials,
    phi_function,
    radius_family,
    s0_seminorm,
    schwartz_test,
    seminorm_profile,
)
from cornerstone.suites import cauchy_test_kernel, gaussian_test_kernel, row_decay_rate, sech_kernel

X1SQ = WeightPolynomial.monomial(2, 0)


@pytest.fixture(scope="module")
def fams():
    return radius_family()


def test_sup_t2_gaussian():
    rep = s0_seminorm(phi_function(lambda p: np.exp(-p[:, 0] ** 2)), X1SQ, gamma_grid(radius=10))
    assert rep.sup_estimate == pytest.approx(math.exp(-1), abs=1e-6)
    assert abs(abs(rep.attained_at["phi"][0]) - 1.0) <= 1e-9


def test_zero_function():
    rep = s0_seminorm(phi_function(lambda p: np.zeros(len(p))), WeightPolynomial.monomial(3, 1), gamma_grid())
    assert rep.sup_estimate == 0.0


def test_constant_weighted_by_x1_diverges(fams):
    prof = seminorm_profile(phi_function(lambda p: np.ones(len(p))), WeightPolynomial.monomial(1, 0), fams)
    assert prof.diverging
    assert [r.sup_estimate for r in prof.reports] == pytest.approx([10.0, 20.0, 40.0])


def test_monotone_under_refinement():
    f = phi_function(lambda p: np.exp(-((p[:, 0] - 0.3) ** 2)) * (1 + p[:, 1] ** 2) ** -3)
    coarse = gamma_grid(radius=10, interior_step=0.25, fiber_step=1 / 256)
    fine = gamma_grid(radius=10, interior_step=0.125, fiber_step=1 / 1024)
    assert s0_seminorm(f, X1SQ, fine).sup_estimate >= s0_seminorm(f, X1SQ, coarse).sup_estimate


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.floats(-3, 3)), min_size=1, max_size=3),
       st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.floats(-3, 3)), min_size=1, max_size=3))
def test_seminorm_triangle_inequality(t1, t2):
    grid = gamma_grid(radius=5, interior_step=0.5, fiber_step=1 / 16)
    f = phi_function(lambda p: np.exp(-0.5 * (p**2).sum(axis=1)))
    P1 = WeightPolynomial(tuple(((a, b), c) for a, b, c in t1))
    P2 = WeightPolynomial(tuple(((a, b), c) for a, b, c in t2))
    total = s0_seminorm(f, P1 + P2, grid).sup_estimate
    assert total <= s0_seminorm(f, P1, grid).sup_estimate + s0_seminorm(f, P2, grid).sup_estimate + 1e-12


def test_degree_budget_limits():
    assert len(monomials(4)) == 15
    with pytest.raises(ValueError):
        WeightPolynomial.monomial(7, 6)


def test_is_s0_verdicts(fams):
    assert is_s0(phi_function(lambda p: np.exp(-(p**2).sum(axis=1))), 4, fams)
    v = is_s0(phi_function(lambda p: 1.0 / (1.0 + p[:, 0] ** 2)), 4, fams)
    assert not v and any(name.endswith("X1^4") for name, _ in v.failures)


def test_compactly_supported_is_s0(fams):
    from cornerstone.bcalc.symbols import plateau_cutoff
    assert is_s0(phi_function(lambda p: plateau_cutoff(p[:, 0], 3.0) * plateau_cutoff(p[:, 1], 3.0)), 4, fams)


def test_kernel_path_matches_generic(grid512):
    k = gaussian_test_kernel(grid512)
    base = kernel_samples(grid512)
    grids, values = [], []
    for r in (10.0, 20.0, 40.0):
        mask = np.max(np.abs(base.phi), axis=1) <= r + 1e-12
        g = base.subset(mask)
        g.radius = r
        grids.append(g)
        values.append(k.values.ravel()[mask])
    generic = is_s0(None, 4, grids, values=values).rows
    fast = is_s0_kernel(k).rows
    assert [r[:2] for r in generic] == [r[:2] for r in fast]
    np.testing.assert_allclose([r[2] for r in generic], [r[2] for r in fast], rtol=1e-12)


def test_schwartz_test_gaussian_and_cauchy(grid512):
    assert schwartz_test(gaussian_test_kernel(grid512))
    v = schwartz_test(cauchy_test_kernel(grid512))
    assert not v and not v.f_in_s0


def test_schwartz_test_zero(grid512):
    assert schwartz_test(BKernel.zeros(grid512))


def test_quantized_kernels_with_gaussian_functions(grid512):
    fs = [
        gaussian_test_kernel(grid512),
        BKernel.from_function(grid512, lambda u, v: np.exp(-(u - v) ** 2 - u**2 / 20)),
    ]
    ks = [quantize(gaussian_symbol(width=w), 6.0, grid512) for w in (0.6, 1.0)]
    ks.append(quantize(gaussian_symbol(shift=0.5, amplitude=lambda u: 1 + 0.5 * np.tanh(u)), 6.0, grid512))
    pairs = [(f, k) for f in fs for k in ks][:5]
    for f, k in pairs:
        assert schwartz_test(f, [("q", k)])


def test_schwartz_test_grid_mismatch(grid512, grid1024):
    with pytest.raises(GridMismatch):
        schwartz_test(gaussian_test_kernel(grid512), [gaussian_test_kernel(grid1024)])


@pytest.mark.parametrize("rate", [1.0, 2.0, 3.0])
def test_decay_rate_recovered(rate):
    fit = decay_exponent(lambda p: np.exp(-rate * np.abs(p[:, 0])), [1.0])
    assert fit.rate == pytest.approx(rate, rel=0.02)
    assert not fit.superexponential


def test_decay_rate_of_sech_power_in_other_direction():
    fit = decay_exponent(lambda p: np.cosh(p[:, 1]) ** -2, [0.0, -1.0])
    assert fit.rate == pytest.approx(2.0, rel=0.02)


def test_decay_rate_shift_invariant():
    a = decay_exponent(lambda p: np.exp(-2 * np.abs(p[:, 0])), [1.0])
    b = decay_exponent(lambda p: np.exp(-2 * np.abs(p[:, 0] + math.log(2))), [1.0])
    assert b.rate == pytest.approx(a.rate, rel=0.02)


def test_gaussian_flagged_superexponential():
    assert decay_exponent(lambda p: np.exp(-p[:, 0] ** 2), [1.0]).superexponential


def test_constant_rate_zero():
    assert abs(decay_exponent(lambda p: np.full(len(p), 3.0), [1.0]).rate) <= 1e-12


def test_insufficient_decay():
    with pytest.raises(InsufficientDecay):
        fit_decay_rate(np.linspace(0, 1, 5), np.ones(5))
    with pytest.raises(InsufficientDecay):
        decay_exponent(lambda p: np.exp(-1e4 * np.abs(p[:, 0])), [1.0], num=64)


def test_closure_of_decay_rates(grid512):
    k1, k2 = sech_kernel(grid512, 1.0), sech_kernel(grid512, 2.0)
    r1, r2 = row_decay_rate(k1), row_decay_rate(k2)
    assert r1 == pytest.approx(1.0, rel=0.02) and r2 == pytest.approx(2.0, rel=0.02)
    assert row_decay_rate(convolve(k1, k2)) >= 0.95 * min(r1, r2)
