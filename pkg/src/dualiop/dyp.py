"""Dual Youla identification around a nominal plant ``G_X`` stabilized by ``K``.

Only stable ``K`` and ``G_X`` are handled, through the trivial factorization
``(N, D) = (f, I)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .eclsq import LsProblem, VarLayout, ConstraintSet, fir_regressor, solve
from .errors import DimensionMismatch, NonCausalInverse, TooShort, UnstableInput
from .lti import (
    CAUSAL_TOL,
    FirSeq,
    RationalTf,
    TfMatrix,
    as_signal,
    as_tfmatrix,
    filter_signal,
    is_stable,
    left_mfd,
    pm_add,
    pm_adj,
    pm_det,
    pm_mul,
)


@dataclass(frozen=True, eq=False)
class CoprimePair:
    """``f = D^-1 N`` with ``N`` and ``D`` stable."""

    N: TfMatrix
    D: TfMatrix

    def __post_init__(self):
        object.__setattr__(self, "N", as_tfmatrix(self.N))
        object.__setattr__(self, "D", as_tfmatrix(self.D))
        if not (is_stable(self.N) and is_stable(self.D)):
            raise UnstableInput("coprime factors must be stable")
        d0 = np.array([[e.num[0] / e.den[0] for e in row] for row in self.D.entries])
        if abs(np.linalg.det(d0)) < CAUSAL_TOL:
            raise NonCausalInverse("D is not biproper")


def trivial_factorization(f) -> CoprimePair:
    f = as_tfmatrix(f)
    if not is_stable(f):
        raise UnstableInput("trivial factorization needs a stable system")
    return CoprimePair(f, TfMatrix.identity(f.shape[0]))


def virtual_data(y, u, r, kf: CoprimePair, gxf: CoprimePair):
    """``alpha = D_K r`` and ``beta = D_X y - N_X u``."""
    y, u, r = as_signal(y), as_signal(u), as_signal(r)
    if not (y.shape[0] == u.shape[0] == r.shape[0]):
        raise DimensionMismatch("signals must have equal length")
    if gxf.N.shape != (y.shape[1], u.shape[1]) or kf.N.shape != (u.shape[1], y.shape[1]):
        raise DimensionMismatch("factorizations do not match the signal dimensions")
    alpha = filter_signal(kf.D, r)
    beta = filter_signal(gxf.D, y) - filter_signal(gxf.N, u)
    return alpha, beta


def alpha_from_loop(y, u, kf: CoprimePair) -> np.ndarray:
    """``D_K u - N_K y``; equals ``D_K r`` on loop data (positive feedback)."""
    return filter_signal(kf.D, u) - filter_signal(kf.N, y)


@dataclass(frozen=True, eq=False)
class DualYpSolution:
    Q: FirSeq
    g_hat: TfMatrix
    alpha: np.ndarray
    beta: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    recovery: tuple | None = None  # (N_X + Q D_K, D_X + Q N_K)


def _compose(Q: FirSeq, kf: CoprimePair, gxf: CoprimePair):
    """Recovery pair ``(N_X + Q D_K, D_X + Q N_K)`` as transfer matrices."""
    q = Q.to_tf()
    return gxf.N + q @ kf.D, gxf.D + q @ kf.N


def _left_inverse_product(den: TfMatrix, num: TfMatrix) -> TfMatrix:
    """``den^-1 num`` with the fraction kept for stability tests."""
    dd, dn = left_mfd(den)
    nd, nn = left_mfd(num)
    # den = dd^-1 dn, num = nd^-1 nn  =>  den^-1 num = dn^-1 dd nd^-1 nn
    p = num.shape[0]
    if p == 1:
        # scalars commute: (dd nn) / (dn nd)
        d_poly = np.convolve(dn[:, 0, 0], nd[:, 0, 0])
        if abs(d_poly[0]) < CAUSAL_TOL:
            raise NonCausalInverse("D_X + Q N_K has a zero constant term")
        m = num.shape[1]
        rows = [[RationalTf(np.convolve(dd[:, 0, 0], nn[:, 0, j]), d_poly) for j in range(m)]]
        return TfMatrix.from_entries(rows)
    # dd and nd are diagonal (row common denominators), so dd nd^-1 = nd^-1 dd
    # and den^-1 num = (nd dn)^-1 (dd nn).
    lhs = pm_mul(nd, dn)
    rhs = pm_mul(dd, nn)
    if abs(np.linalg.det(lhs[0])) < CAUSAL_TOL:
        raise NonCausalInverse("D_X + Q N_K has a singular constant term")
    det = pm_det(lhs)
    full = pm_mul(pm_adj(lhs), rhs)
    m = num.shape[1]
    return TfMatrix.from_entries(
        [[RationalTf(full[:, i, j], det) for j in range(m)] for i in range(p)],
        mfd=(lhs, rhs),
    )


def identify_yp(y, u, r, kf: CoprimePair, gxf: CoprimePair, tau: int = 14) -> DualYpSolution:
    """Least-squares FIR ``Q`` from ``alpha`` to ``beta`` and ``G = (D_X + Q N_K)^-1 (N_X + Q D_K)``."""
    t0 = time.perf_counter()
    alpha, beta = virtual_data(y, u, r, kf, gxf)
    n, p = beta.shape
    m = alpha.shape[1]
    if n < tau:
        raise TooShort(f"need N >= tau={tau}, got {n}")
    lay = VarLayout().add("Q", (tau, p, m))
    none = ConstraintSet(np.zeros((0, lay.size)), np.zeros(0), [])
    ls = solve(LsProblem(fir_regressor(alpha, tau, p), beta.reshape(-1), none, lay))
    Q = FirSeq(ls.params["Q"])
    num, den = _compose(Q, kf, gxf)
    g_hat = _left_inverse_product(den, num)
    diag = ls.summary()
    diag["solve_time_s"] = time.perf_counter() - t0
    return DualYpSolution(Q, g_hat, alpha, beta, diag, (num, den))


def two_stage_gb(y1, u1, r1, y2, u2, r2, kf: CoprimePair, tau: int = 14) -> DualYpSolution:
    """Stage 1 fits around ``G_X = 0``; its recovery pair is the nominal plant of stage 2."""
    p, m = kf.N.shape[1], kf.N.shape[0]
    zero = trivial_factorization(TfMatrix.zeros(p, m))
    first = identify_yp(y1, u1, r1, kf, zero, tau)
    num, den = first.recovery
    second = identify_yp(y2, u2, r2, kf, CoprimePair(num, den), tau)
    second.diagnostics["stage1_cost"] = first.diagnostics["cost"]
    return second
