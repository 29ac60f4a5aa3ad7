"""Dual input-output parameterization: identify ``(W, X, Y, Z)`` and recover ``G = W^-1 X``.

Controllers are given in the positive-feedback convention ``u = K y + r``.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .eclsq import ConstraintBuilder, ConstraintSet, LsProblem, VarLayout, convolution_matrix
from .eclsq import fir_regressor, solve
from .errors import DimensionMismatch, NonInvertibleW0, TooShort, UnsupportedMimoRationalController
from .lti import (
    CAUSAL_TOL,
    FirSeq,
    RationalTf,
    TfMatrix,
    as_signal,
    as_tfmatrix,
    fir_of,
    internal_stability,
    pm_adj,
    pm_det,
    pm_mul,
)

DEFAULT_TAU = 14


@dataclass(frozen=True, eq=False)
class DualIopSolution:
    W: FirSeq
    X: FirSeq
    Y: FirSeq
    Z: FirSeq
    g_hat: TfMatrix
    diagnostics: dict = field(default_factory=dict)
    tau: int = DEFAULT_TAU


def iop_layout(tau: int, p: int, m: int) -> VarLayout:
    return (
        VarLayout()
        .add("W", (tau, p, p))
        .add("X", (tau, p, m))
        .add("Y", (tau, m, p))
        .add("Z", (tau, m, m))
    )


def controller_form(K):
    """Classify a controller as ``('fir', FirSeq)`` or ``('rational', RationalTf)``."""
    fir = fir_of(K) if not isinstance(K, RationalTf) or K.is_fir else None
    if isinstance(K, RationalTf) and K.is_fir:
        fir = FirSeq(K.num)
    if fir is not None:
        return "fir", fir
    k = as_tfmatrix(K)
    if k.is_siso:
        return "rational", k.scalar()
    raise UnsupportedMimoRationalController(
        "MIMO controllers must be deadbeat (FIR); got rational entries"
    )


def _tags(support: int, a: int, b: int):
    if a == b == 1:
        return [f"k={k}" for k in range(support)]
    return [f"k={k},{i},{j}" for k, i, j in itertools.product(range(support), range(a), range(b))]


def _pad(tau: int, support: int, blk: int) -> np.ndarray:
    return np.eye(support * blk, tau * blk)


def _delta(support: int, n: int, coeffs=None) -> np.ndarray:
    """vec of ``I`` (or ``coeffs * I``) padded to ``support`` coefficients."""
    out = np.zeros((support, n, n))
    c = np.ones(1) if coeffs is None else np.asarray(coeffs)
    for k, ck in enumerate(c):
        out[k] = ck * np.eye(n)
    return out.reshape(-1)


def build_constraints(K, tau: int, dims: tuple[int, int] | None = None) -> ConstraintSet:
    """Rows for ``Y - KW = 0``, ``Z - KX = I``, ``W - XK = I``, ``Y - ZK = 0``.

    Each equality covers the full product support; for a rational SISO ``K``
    the denominator-cleared forms are used.
    """
    kind, k = controller_form(K)
    if kind == "fir":
        nu, m, p = k.coeffs.shape
        if dims is not None and tuple(dims) != (p, m):
            raise DimensionMismatch(f"controller is {m}x{p}, dims say plant is {dims}")
        if tau < nu:
            raise TooShort(f"tau={tau} is shorter than the controller length {nu}")
        lay = iop_layout(tau, p, m)
        s = nu + tau - 1
        cb = ConstraintBuilder(lay)
        cb.add(
            "Y-KW=0",
            {"Y": _pad(tau, s, m * p), "W": -convolution_matrix(k, tau, "left", p)},
            0.0,
            _tags(s, m, p),
        )
        cb.add(
            "Z-KX=I",
            {"Z": _pad(tau, s, m * m), "X": -convolution_matrix(k, tau, "left", m)},
            _delta(s, m),
            _tags(s, m, m),
        )
        cb.add(
            "W-XK=I",
            {"W": _pad(tau, s, p * p), "X": -convolution_matrix(k, tau, "right", p)},
            _delta(s, p),
            _tags(s, p, p),
        )
        cb.add(
            "Y-ZK=0",
            {"Y": _pad(tau, s, m * p), "Z": -convolution_matrix(k, tau, "right", m)},
            0.0,
            _tags(s, m, p),
        )
        return cb.build()

    nu = max(len(k.num), len(k.den))
    if tau < nu:
        raise TooShort(f"tau={tau} is shorter than the controller order {nu}")
    nk = np.zeros(nu)
    dk = np.zeros(nu)
    nk[: len(k.num)] = k.num
    dk[: len(k.den)] = k.den
    cn = convolution_matrix(nk, tau)
    cd = convolution_matrix(dk, tau)
    s = nu + tau - 1
    lay = iop_layout(tau, 1, 1)
    cb = ConstraintBuilder(lay)
    tags = _tags(s, 1, 1)
    cb.add("dK*Y-nK*W=0", {"Y": cd, "W": -cn}, 0.0, tags)
    cb.add("dK*Z-nK*X=dK", {"Z": cd, "X": -cn}, _delta(s, 1, dk), tags)
    cb.add("dK*W-nK*X=dK", {"W": cd, "X": -cn}, _delta(s, 1, dk), tags)
    cb.add("dK*Y-nK*Z=0", {"Y": cd, "Z": -cn}, 0.0, tags)
    return cb.build()


def left_fraction(W: FirSeq, X: FirSeq) -> TfMatrix:
    """``W^-1 X`` as a transfer matrix that keeps the fraction for stability tests."""
    p, m = X.shape
    if p == 1:
        return TfMatrix.from_entries(
            [[RationalTf(X.coeffs[:, 0, j], W.coeffs[:, 0, 0]) for j in range(m)]],
            mfd=(W.coeffs, X.coeffs),
        )
    det = pm_det(W.coeffs)
    num = pm_mul(pm_adj(W.coeffs), X.coeffs)
    return TfMatrix.from_entries(
        [[RationalTf(num[:, i, j], det) for j in range(m)] for i in range(p)],
        mfd=(W.coeffs, X.coeffs),
    )


def identify(y, r, K, tau: int = DEFAULT_TAU) -> DualIopSolution:
    """Fit ``min ||y - X r||^2`` over the affine set of dual parameters."""
    t0 = time.perf_counter()
    y = as_signal(y)
    r = as_signal(r)
    n, p = y.shape
    m = r.shape[1]
    if r.shape[0] != n:
        raise DimensionMismatch("y and r lengths differ")
    if n < tau:
        raise TooShort(f"need N >= tau={tau}, got {n}")
    cons = build_constraints(K, tau, (p, m))
    lay = iop_layout(tau, p, m)
    T = np.zeros((n * p, lay.size))
    T[:, lay.slice("X")] = fir_regressor(r, tau, p)
    ls = solve(LsProblem(T, y.reshape(-1), cons, lay))
    W, X, Y, Z = (FirSeq(ls.params[k]) for k in "WXYZ")
    if abs(np.linalg.det(W.coeffs[0])) < CAUSAL_TOL:
        raise NonInvertibleW0("estimated W[0] is singular")
    diag = ls.summary()
    diag["solve_time_s"] = time.perf_counter() - t0
    return DualIopSolution(W, X, Y, Z, left_fraction(W, X), diag, tau)


def feasible_witness(X, K, tau: int) -> dict[str, np.ndarray]:
    """A point of the deadbeat-controller affine set built from the head of ``X``.

    ``X`` is cut to ``tau - 2(nu - 1)`` coefficients; then ``W = I + X K``,
    ``Z = I + K X`` and ``Y = K W`` all fit inside ``tau`` coefficients.
    """
    kind, k = controller_form(K)
    if kind != "fir":
        raise UnsupportedMimoRationalController("witness construction needs a deadbeat K")
    kc = k.coeffs
    nu, m, p = kc.shape
    keep = tau - 2 * (nu - 1)
    x = np.zeros((tau, p, m))
    xin = X.coeffs if isinstance(X, FirSeq) else np.asarray(X, dtype=float).reshape(-1, p, m)
    x[:keep] = xin[:keep]
    w = pm_mul(x[:keep], kc)
    w[0] += np.eye(p)
    z = pm_mul(kc, x[:keep])
    z[0] += np.eye(m)
    yv = pm_mul(kc, w)

    def fit(a, shape):
        out = np.zeros((tau,) + shape)
        out[: len(a)] = a[:tau]
        return out

    return {"W": fit(w, (p, p)), "X": x, "Y": fit(yv, (m, p)), "Z": fit(z, (m, m))}


@dataclass
class ClosedLoopReport:
    tyr_deviation: float
    recovery_deviation: float
    stabilized: bool
    wz_coeff_deviation: float | None = None

    def ok(self, tyr_tol: float = 1e-6, rec_tol: float = 1e-8) -> bool:
        return self.stabilized and self.tyr_deviation <= tyr_tol and self.recovery_deviation <= rec_tol


def verify_closed_loop(sol: DualIopSolution, K, n_freq: int = 64) -> ClosedLoopReport:
    """Check ``(I - G K)^-1 G = X``, ``W^-1 X = X Z^-1`` and internal stability."""
    omega = np.pi * np.arange(1, n_freq + 1) / (n_freq + 1)
    g = sol.g_hat(omega)
    k = as_tfmatrix(K)(omega)
    p = g.shape[1]
    xw = sol.X(omega)
    tyr = np.linalg.solve(np.eye(p) - g @ k, g)
    right = xw @ np.linalg.inv(sol.Z(omega))
    left = np.linalg.solve(sol.W(omega), xw)
    wz = None
    if sol.W.shape == (1, 1) and sol.Z.shape == (1, 1):
        wz = float(np.max(np.abs(sol.W.coeffs - sol.Z.coeffs)))
    return ClosedLoopReport(
        tyr_deviation=float(np.max(np.abs(tyr - xw))),
        recovery_deviation=float(np.max(np.abs(left - right))),
        stabilized=internal_stability(sol.g_hat, K),
        wz_coeff_deviation=wz,
    )
