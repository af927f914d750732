import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import expit

from cornerstone import groupoid as gp
from cornerstone.decoupage import interval_model
from cornerstone.expr import Expression
from cornerstone.model import IntervalModel


# beyond |u| ~ 10 the direct path loses digits in 1 - x; that is what the log form avoids
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_interior_phi_matches_groupoid(u, v):
    x, y = expit(u), expit(v)
    g = gp.GroupoidElement((float(x),), (float(y),), {})
    np.testing.assert_allclose(IntervalModel().phi_interior(u, v), gp.phi_hom(interval_model(), g),
                               rtol=1e-9, atol=1e-9)


def test_log_coordinates_avoid_cancellation():
    lr = IntervalModel().log_rho(np.array([-700.0, 700.0]))
    assert lr[0, 0] == pytest.approx(-700.0) and lr[1, 1] == pytest.approx(-700.0)


def test_fiber_phi_orientation():
    np.testing.assert_allclose(IntervalModel.phi_fiber(0, np.array([2.0])), [[2.0, 0.0]])
    np.testing.assert_allclose(IntervalModel.phi_fiber(1, np.array([2.0])), [[0.0, -2.0]])


def test_spec_round_trip():
    m = IntervalModel(factor0=Expression("2 + x", 1))
    m2 = IntervalModel.from_spec(m.to_spec())
    u = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(m.log_rho(u), m2.log_rho(u))
    np.testing.assert_allclose(m.log_rho(u)[:, 0] - IntervalModel().log_rho(u)[:, 0], np.log(2 + expit(u)))
