import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualiop import diop, dslp, presets
from dualiop.eclsq import nullspace_split
from dualiop.errors import InfeasibleConstraints
from dualiop.lti import StateSpace, internal_stability, realize
from dualiop.signals import PrbsSpec, gaussian, prbs
from dualiop.simulate import simulate

TAU = 14
W64 = np.pi * np.arange(1, 65) / 65


def test_first_row_gives_identity(K):
    ss = realize(K)
    cons = dslp.build_slp_constraints(ss, TAU)
    lay = dslp.slp_layout(TAU, ss.n, 1, 1)
    x0, basis, _ = nullspace_split(cons.A, cons.b)
    r1 = lay.slice("R").start
    # R[1] is pinned: identity in x0, no freedom in the basis
    assert np.allclose(x0[r1 : r1 + 4], np.eye(2).ravel())
    assert np.allclose(basis[r1 : r1 + 4], 0)


def test_zero_controller_collapse():
    ss = StateSpace(np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((1, 1)))
    cons = dslp.build_slp_constraints(ss, 6)
    lay = dslp.slp_layout(6, 2, 1, 1)
    x0, basis, _ = nullspace_split(cons.A, cons.b)
    p = lay.unpack(x0)
    assert np.allclose(p["R"][0], np.eye(2)) and np.allclose(p["R"][1:], 0)
    assert np.allclose(p["N"], 0) and np.allclose(p["M"], 0)
    off_l = np.delete(basis, lay.slice("L"), axis=0)
    assert basis.shape[1] == 6 and np.allclose(off_l, 0)


def test_variable_count_exceeds_iop(K):
    ss = realize(K)
    assert ss.n == 2
    lay = dslp.slp_layout(TAU, 2, 1, 1)
    per_coeff = 4 + 2 + 2 + 1
    assert lay.size == per_coeff * (TAU - 1) + 1
    assert lay.size > diop.iop_layout(TAU, 1, 1).size


def test_noise_free_oracle(clean_d10, K):
    r, _, y = clean_d10
    sol = dslp.identify_slp(y, r, K)
    assert np.max(np.abs(sol.L.coeffs[:3, 0, 0] - [1, 0.6, 0.27])) <= 1e-6
    assert internal_stability(sol.g_hat, K)
    for f in (sol.R, sol.N, sol.M):
        assert np.all(f.coeffs[0] == 0)
    assert sol.diagnostics["constraint_residual"] <= 1e-8


def test_structural_identity_with_iop(clean_d10, K):
    r, _, y = clean_d10
    a = dslp.identify_slp(y, r, K)
    b = diop.identify(y, r, K)
    assert np.max(np.abs(a.L.coeffs - b.X.coeffs)) <= 1e-4


def test_realization_invariance(noisy_d10, K):
    r, _, y = noisy_d10
    ss = realize(K)
    T = np.array([[2.0, 1.0], [0.3, -1.0]])
    a = dslp.identify_slp(y, r, ss)
    b = dslp.identify_slp(y, r, ss.similarity(T))
    assert np.max(np.abs(a.L.coeffs - b.L.coeffs)) <= 1e-8
    assert np.max(np.abs(a.g_hat(W64) - b.g_hat(W64))) <= 1e-6


def test_unobservable_mode_is_infeasible(noisy_d10):
    """A stable unobservable mode cannot be cancelled by FIR response functions."""
    r, _, y = noisy_d10
    ss = realize(presets.benchmark_controller())
    A = np.zeros((3, 3))
    A[:2, :2] = ss.A
    A[2, 2] = 0.5
    big = StateSpace(A, np.vstack([ss.B, [[1.0]]]), np.hstack([ss.C, [[0.0]]]), ss.D)
    with pytest.raises(InfeasibleConstraints):
        dslp.identify_slp(y, r, big)


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_stabilized_on_noisy_runs(seed):
    K = presets.benchmark_controller()
    r = prbs(PrbsSpec(8))
    u, y = simulate(presets.benchmark_plant(), r, gaussian(r.shape[0], 1, 1.0, seed))
    sol = dslp.identify_slp(y, r, K)
    assert internal_stability(sol.g_hat, K)


def test_feedthrough_warns():
    ss = StateSpace(np.array([[0.5]]), np.array([[1.0]]), np.array([[0.2]]), np.array([[0.1]]))
    with pytest.warns(UserWarning):
        dslp.build_slp_constraints(ss, 5)
