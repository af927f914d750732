import numpy as np
import pytest
from scipy.integrate import simpson

from cornerstone.bcalc import BKernel, ModelGrid, load_function, load_kernel, save_function, save_kernel
from cornerstone.bcalc.grid import simpson_weights
from cornerstone.errors import GridMismatch


@pytest.mark.parametrize("n", [3, 4, 5, 6, 256, 1024, 1025])
def test_simpson_weights_match_scipy(n):
    x = np.linspace(-1.0, 2.0, n)
    f = np.exp(-x**2) * np.cos(3 * x) + x**3
    assert simpson_weights(n, x[1] - x[0]) @ f == pytest.approx(simpson(f, x=x), rel=1e-13)


@pytest.mark.parametrize("n", [100, 255, 3000])
def test_grid_size_must_be_power_of_two(n):
    with pytest.raises(ValueError):
        ModelGrid(20.0, n)


def test_grid_basics(grid1024):
    assert grid1024.u[0] == -20.0 and grid1024.u[-1] == 20.0
    assert grid1024.h == pytest.approx(40 / 1023)
    assert grid1024.weights.sum() == pytest.approx(40.0)
    with pytest.raises(ValueError):
        grid1024.u[0] = 1.0


def test_kernel_binary_round_trip(tmp_path, grid512):
    k = BKernel.from_function(grid512, lambda u, v: np.exp(-(u - v) ** 2) * (1 + 1j * np.tanh(u)))
    k = k.with_meta({"rate": 2.0})
    path = tmp_path / "k.bker"
    save_kernel(path, k)
    back = load_kernel(path)
    assert back.grid == grid512
    np.testing.assert_array_equal(back.values, k.values)
    assert back.decay_meta == {"rate": 2.0}
    assert path.read_bytes()[:5] == b"BKER1"
    assert (tmp_path / "k.bker.json").exists()


def test_function_round_trip(tmp_path, grid512):
    f = np.sin(grid512.u) + 0j
    save_function(tmp_path / "f.bin", grid512, f)
    g, back = load_function(tmp_path / "f.bin")
    assert g == grid512
    np.testing.assert_array_equal(back, f)


def test_kernel_arithmetic_and_adjoint(grid512):
    a = BKernel.from_function(grid512, lambda u, v: u + 2j * v)
    b = BKernel.zeros(grid512)
    assert (a + b).sup_distance(a) == 0
    assert (a * 2 - a).sup_distance(a) == 0
    np.testing.assert_array_equal(a.adjoint().values, a.values.conj().T)
    assert not a.is_real and a.density_trivialization


def test_mismatched_grids(grid512, grid1024):
    with pytest.raises(GridMismatch):
        grid512.check_same(grid1024)
