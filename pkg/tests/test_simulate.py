import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualiop import presets
from dualiop.errors import DimensionMismatch, IllPosedLoop
from dualiop.lti import RationalTf, TfMatrix, closed_loop_maps, filter_signal
from dualiop.signals import gaussian, impulse, prbs, PrbsSpec
from dualiop.simulate import ClosedLoopPlant, simulate

from .strategies import random_stable_pair

PLANT = presets.benchmark_plant()


def test_impulse_response():
    u, y = simulate(PLANT, impulse(20), np.zeros((20, 1)))
    assert np.allclose(u[:3, 0], [1, -1, 0.2], atol=1e-12)
    k = np.arange(20)
    assert np.allclose(y[:, 0], (k + 1) * 0.3**k, atol=1e-12)
    x = closed_loop_maps(presets.G0, presets.benchmark_controller()).X
    assert np.max(np.abs(y - filter_signal(x, impulse(20)))) <= 1e-10


def test_zero_inputs():
    u, y = simulate(PLANT, np.zeros((10, 1)), np.zeros((10, 1)))
    assert not u.any() and not y.any()


def test_zero_plant_degenerates():
    k = RationalTf([0.2, -0.1], [1, 0.3])
    plant = ClosedLoopPlant(RationalTf([0.0]), k, presets.H0)
    r, e = gaussian(50, 1, 1, 0), gaussian(50, 1, 1, 1)
    u, y = simulate(plant, r, e)
    assert np.allclose(y, filter_signal(presets.H0, e), atol=1e-12)
    assert np.allclose(u, filter_signal(k, y) + r, atol=1e-12)


def _residuals(plant, r, e, u, y):
    ry = y - filter_signal(plant.G, u) - filter_signal(plant.H, e)
    ru = u - plant.feedback_sign * filter_signal(plant.K, y) - r
    return np.abs(ry).max(), np.abs(ru).max()


@pytest.mark.parametrize("sign", [1, -1])
def test_residual_identities(sign):
    plant = presets.benchmark_plant(sign)
    r = prbs(PrbsSpec(9))
    e = gaussian(r.shape[0], 1, 1.0, 5)
    u, y = simulate(plant, r, e)
    assert max(_residuals(plant, r, e, u, y)) < 1e-9


def test_sign_conventions_agree():
    r = prbs(PrbsSpec(8))
    e = gaussian(r.shape[0], 1, 1.0, 2)
    a = simulate(presets.benchmark_plant(1), r, e)
    b = simulate(presets.benchmark_plant(-1), r, e)
    assert np.allclose(a[0], b[0]) and np.allclose(a[1], b[1])


def test_feedthrough_loop_solved():
    g = RationalTf([0.5, 0.2], [1, -0.3])
    k = RationalTf([-0.4, 0.1])
    plant = ClosedLoopPlant(g, k, RationalTf([1.0]))
    r, e = gaussian(200, 1, 1, 0), gaussian(200, 1, 1, 1)
    u, y = simulate(plant, r, e)
    assert max(_residuals(plant, r, e, u, y)) < 1e-9


def test_mimo_residuals():
    g = TfMatrix.from_entries([[RationalTf([0, 1], [1, -0.5]), RationalTf([0, 0.2])],
                               [RationalTf([0.1]), RationalTf([0, 1], [1, 0.3])]])
    k = TfMatrix.from_entries([[RationalTf([-0.2, 0.1]), 0.0], [0.05, RationalTf([-0.3])]])
    plant = ClosedLoopPlant(g, k, TfMatrix.identity(2))
    r, e = gaussian(300, 2, 1, 0), gaussian(300, 2, 0.5, 1)
    u, y = simulate(plant, r, e)
    assert max(_residuals(plant, r, e, u, y)) < 1e-9


@given(st.integers(0, 10**6))
def test_superposition(seed):
    rng = np.random.default_rng(seed)
    r1, r2, e = rng.normal(size=(3, 120, 1))
    a = simulate(PLANT, r1 + r2, e)
    b = simulate(PLANT, r1, e)
    c = simulate(PLANT, r2, np.zeros_like(e))
    for i in range(2):
        assert np.allclose(a[i], b[i] + c[i], atol=1e-9)


def test_bounded_long_run():
    n = 2**14
    r = np.sign(gaussian(n, 1, 1, 0))
    u, y = simulate(PLANT, r, gaussian(n, 1, 1, 1))
    assert np.isfinite(y).all() and np.abs(y).max() < 1e3


def test_random_stable_pairs_residuals():
    rng = np.random.default_rng(11)
    for _ in range(5):
        g, k = random_stable_pair(rng)
        plant = ClosedLoopPlant(g, k, RationalTf([1.0]))
        r, e = rng.normal(size=(2, 100, 1))
        u, y = simulate(plant, r, e)
        assert max(_residuals(plant, r, e, u, y)) < 1e-9


def test_discard_and_errors():
    u, y = simulate(PLANT, impulse(10), np.zeros((10, 1)), discard=3)
    assert y.shape == (7, 1)
    with pytest.raises(DimensionMismatch):
        simulate(PLANT, np.zeros((10, 2)), np.zeros((10, 1)))
    with pytest.raises(IllPosedLoop):
        ClosedLoopPlant(RationalTf([1.0]), RationalTf([1.0]), RationalTf([1.0]))
    with pytest.raises(DimensionMismatch):
        ClosedLoopPlant(TfMatrix.zeros(2, 1), TfMatrix.zeros(2, 1), TfMatrix.identity(2))
