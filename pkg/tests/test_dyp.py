import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualiop import dyp, presets
from dualiop.errors import NonCausalInverse, UnstableInput
from dualiop.lti import RationalTf, TfMatrix, internal_stability
from dualiop.signals import PrbsSpec, gaussian, prbs
from dualiop.simulate import ClosedLoopPlant, simulate

W64 = np.pi * np.arange(1, 65) / 65


@pytest.fixture(scope="module")
def kf():
    return dyp.trivial_factorization(presets.benchmark_controller())


def test_trivial_factorizations():
    a = dyp.trivial_factorization(presets.G_A)
    assert np.allclose(a.N(W64), 0) and np.allclose(a.D(W64), 1)
    c = dyp.trivial_factorization(presets.G_C_LITERAL)
    assert np.allclose(c.N(W64)[:, 0, 0], presets.G_C_LITERAL(W64))
    assert np.allclose(np.abs(presets.G_C_LITERAL.poles()), 0.5)
    k = dyp.trivial_factorization(presets.benchmark_controller())
    assert np.allclose(k.D(W64), 1)
    with pytest.raises(UnstableInput):
        dyp.trivial_factorization(RationalTf([1.0], [1, -1.2]))


def test_virtual_data_examples(noisy_d10, kf):
    r, u, y = noisy_d10
    alpha, beta = dyp.virtual_data(y, u, r, kf, dyp.trivial_factorization(presets.G_A))
    assert np.array_equal(beta, y) and np.array_equal(alpha, r)
    assert np.max(np.abs(dyp.alpha_from_loop(y, u, kf) - alpha)) <= 1e-9


def test_alpha_identity_rational_controller():
    k = RationalTf([-0.3], [1, -0.2])
    g = RationalTf([0, 1.0], [1, -0.7])
    r = prbs(PrbsSpec(9))
    u, y = simulate(ClosedLoopPlant(g, k, RationalTf([1.0])), r, gaussian(r.shape[0], 1, 1.0, 0))
    kfr = dyp.CoprimePair(RationalTf([-0.3]), RationalTf([1, -0.2]))
    alpha, _ = dyp.virtual_data(y, u, r, kfr, dyp.trivial_factorization(presets.G_A))
    assert np.max(np.abs(dyp.alpha_from_loop(y, u, kfr) - alpha)) <= 1e-9


def test_noise_free_zero_nominal(clean_d10, kf):
    r, u, y = clean_d10
    sol = dyp.identify_yp(y, u, r, kf, dyp.trivial_factorization(presets.G_A))
    assert np.max(np.abs(sol.Q.coeffs[:3, 0, 0] - [1, 0.6, 0.27])) <= 1e-6
    assert internal_stability(sol.g_hat, presets.benchmark_controller())


def test_exact_nominal_gives_zero_q(clean_d10, kf):
    r, u, y = clean_d10
    sol = dyp.identify_yp(y, u, r, kf, dyp.trivial_factorization(presets.G0))
    assert np.max(np.abs(sol.Q.coeffs)) <= 1e-9
    assert np.max(np.abs(sol.g_hat(W64)[:, 0, 0] - presets.G0(W64))) <= 1e-9


def test_two_stage_noise_free(clean_d10, kf):
    r, u, y = clean_d10
    sol = dyp.two_stage_gb(y, u, r, y, u, r, kf)
    assert np.max(np.abs(sol.Q.coeffs)) <= 1e-9
    assert internal_stability(sol.g_hat, presets.benchmark_controller())


@settings(max_examples=8)
@given(st.integers(0, 10**6))
def test_two_stage_equals_zero_nominal_on_stage_two_data(seed):
    """With alpha = r, stage 2 refits y on r, so the recovered plant matches G_a's."""
    K = presets.benchmark_controller()
    kf = dyp.trivial_factorization(K)
    r = prbs(PrbsSpec(8))
    plant = presets.benchmark_plant()
    u1, y1 = simulate(plant, r, gaussian(r.shape[0], 1, 1.0, [seed, 1]))
    u2, y2 = simulate(plant, r, gaussian(r.shape[0], 1, 1.0, seed))
    gb = dyp.two_stage_gb(y1, u1, r, y2, u2, r, kf)
    ga = dyp.identify_yp(y2, u2, r, kf, dyp.trivial_factorization(presets.G_A))
    assert np.max(np.abs(gb.g_hat(W64) - ga.g_hat(W64))) <= 1e-8 * (1 + np.abs(ga.g_hat(W64)).max())


@settings(max_examples=8)
@given(st.integers(0, 10**6), st.sampled_from(["zero", "gc", "two_stage"]))
def test_every_preset_stabilized(seed, gx):
    K = presets.benchmark_controller()
    kf = dyp.trivial_factorization(K)
    r = prbs(PrbsSpec(8))
    plant = presets.benchmark_plant()
    u, y = simulate(plant, r, gaussian(r.shape[0], 1, 1.0, seed))
    if gx == "two_stage":
        u1, y1 = simulate(plant, r, gaussian(r.shape[0], 1, 1.0, [seed, 1]))
        sol = dyp.two_stage_gb(y1, u1, r, y, u, r, kf)
    else:
        nominal = presets.G_A if gx == "zero" else presets.G_C
        sol = dyp.identify_yp(y, u, r, kf, dyp.trivial_factorization(nominal))
    assert internal_stability(sol.g_hat, K)


def test_gc_preset_is_stabilized_literal_is_not():
    K = presets.benchmark_controller()
    assert internal_stability(presets.G_C, K)
    assert not internal_stability(presets.G_C_LITERAL, K)
    assert not internal_stability(presets.G_C_LITERAL, presets.K0)


def test_mimo_zero_nominal():
    g = TfMatrix.from_entries([[RationalTf([0, 1], [1, -0.5]), RationalTf([0, 0.2])],
                               [RationalTf([0, 0.1]), RationalTf([0, 1], [1, 0.3])]])
    k = TfMatrix.from_entries([[RationalTf([0, -0.2, 0.1]), 0.0], [RationalTf([0, 0.05]), RationalTf([0, -0.3])]])
    rng = np.random.default_rng(0)
    r = np.sign(rng.normal(size=(1500, 2)))
    u, y = simulate(ClosedLoopPlant(g, k, TfMatrix.identity(2)), r, 0.1 * rng.normal(size=(1500, 2)))
    sol = dyp.identify_yp(y, u, r, dyp.trivial_factorization(k), dyp.trivial_factorization(TfMatrix.zeros(2, 2)), 20)
    assert internal_stability(sol.g_hat, k)
    assert np.max(np.abs(sol.g_hat(W64) - g(W64))) < 0.2


def test_noncausal_recovery():
    r = np.random.default_rng(0).normal(size=(40, 1))
    kf = dyp.trivial_factorization(RationalTf([1.0]))
    with pytest.raises(NonCausalInverse):
        dyp.identify_yp(-r, np.zeros_like(r), r, kf, dyp.trivial_factorization(presets.G_A), 3)
