"""Dual system-level parameterization over a state-space realization of the controller.

With the controller ``xi+ = A xi + B y``, ``u = C xi``, the response
functions ``R, N, M`` are strictly proper and ``L`` is the ``r -> y`` map.
Coefficient ``0`` of ``R, N, M`` is zero by construction.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .eclsq import ConstraintBuilder, ConstraintSet, LsProblem, VarLayout, fir_regressor, solve
from .errors import DimensionMismatch, SingularConstantTerm, TooShort
from .lti import (
    CAUSAL_TOL,
    FirSeq,
    RationalTf,
    StateSpace,
    TfMatrix,
    as_signal,
    pm_adj,
    pm_add,
    pm_det,
    pm_mul,
    realize,
)


@dataclass(frozen=True, eq=False)
class DualSlpSolution:
    R: FirSeq
    N: FirSeq
    M: FirSeq
    L: FirSeq
    g_hat: TfMatrix
    diagnostics: dict = field(default_factory=dict)
    tau: int = 14


def slp_layout(tau: int, n: int, p: int, m: int) -> VarLayout:
    # R, N, M hold coefficients 1..tau-1; L holds 0..tau-1
    return (
        VarLayout()
        .add("R", (tau - 1, n, n))
        .add("N", (tau - 1, n, m))
        .add("M", (tau - 1, p, n))
        .add("L", (tau, p, m))
    )


def _as_ss(ss) -> StateSpace:
    return ss if isinstance(ss, StateSpace) else realize(ss)


class _Rows:
    """Coefficient-k rows of a matrix equation built from left/right products."""

    def __init__(self, layout: VarLayout, a: int, b: int):
        self.lay = layout
        self.block = np.zeros((a * b, layout.size))
        self.a, self.b = a, b

    def _cols(self, name: str, k: int):
        first = 0 if name == "L" else 1
        if k < first or k - first >= self.lay.shapes[name][0]:
            return None
        _, r, c = self.lay.shapes[name]
        off = self.lay.offsets[name] + (k - first) * r * c
        return slice(off, off + r * c)

    def left(self, coef: np.ndarray, name: str, k: int) -> None:
        """Add ``coef @ V[k]``."""
        cols = self._cols(name, k)
        if cols is not None:
            self.block[:, cols] += np.kron(coef, np.eye(self.b))

    def right(self, name: str, k: int, coef: np.ndarray) -> None:
        """Add ``V[k] @ coef``."""
        cols = self._cols(name, k)
        if cols is not None:
            self.block[:, cols] += np.kron(np.eye(self.a), coef.T)


def build_slp_constraints(ss, tau: int) -> ConstraintSet:
    """Coefficient form of ``[zI - A, -B] [R N; M L] = [I 0]`` and ``[R N; M L] [zI - A; -C] = [I; 0]``.

    Row ``k = 0..tau-1`` matches the ``z^-k`` coefficient; the last one is the
    truncation boundary where the shifted term ``V[tau]`` is zero.
    """
    ss = _as_ss(ss)
    if tau < 2:
        raise TooShort("dual SLP needs tau >= 2")
    if np.any(ss.D != 0):
        warnings.warn("D_K != 0 is ignored by the dual SLP constraints", stacklevel=2)
    A, B, C = ss.A, ss.B, ss.C
    n = ss.n
    m, p = ss.D.shape  # K maps y (p) to u (m)
    lay = slp_layout(tau, n, p, m)
    cb = ConstraintBuilder(lay)
    eye_n = np.eye(n)
    # (label, rows, cols, terms); a term (side, name, shift, coef) contributes
    # coef @ V[k + shift] (side "L") or V[k + shift] @ coef (side "R").
    equations = (
        ("zR-AR-BM=I", n, n, (("L", "R", 1, eye_n), ("L", "R", 0, -A), ("L", "M", 0, -B))),
        ("zN-AN-BL=0", n, m, (("L", "N", 1, eye_n), ("L", "N", 0, -A), ("L", "L", 0, -B))),
        ("zR-RA-NC=I", n, n, (("R", "R", 1, eye_n), ("R", "R", 0, -A), ("R", "N", 0, -C))),
        ("zM-MA-LC=0", p, n, (("R", "M", 1, eye_n), ("R", "M", 0, -A), ("R", "L", 0, -C))),
    )
    for label, a, b, terms in equations:
        for k in range(tau):
            rw = _Rows(lay, a, b)
            for side, name, shift, coef in terms:
                if side == "L":
                    rw.left(coef, name, k + shift)
                else:
                    rw.right(name, k + shift, coef)
            rhs = np.eye(n).reshape(-1) if (k == 0 and label.endswith("=I")) else 0.0
            cb.add_rows(label, rw.block, rhs, [f"k={k},{i}" for i in range(a * b)])
    return cb.build()


def _full(coeffs: np.ndarray, tau: int) -> FirSeq:
    """Prepend the structural zero coefficient."""
    out = np.zeros((tau,) + coeffs.shape[1:])
    out[1:] = coeffs
    return FirSeq(out)


def recover(R: FirSeq, N: FirSeq, M: FirSeq, L: FirSeq) -> TfMatrix:
    """``G = L - M R^-1 N`` with ``R = z^-1 P`` so that ``M R^-1 = (z M) P^-1``."""
    P = R.coeffs[1:]
    Ms = M.coeffs[1:]
    if abs(np.linalg.det(P[0])) < CAUSAL_TOL:
        raise SingularConstantTerm("R[1] is singular")
    det = pm_det(P)
    corr = pm_mul(pm_mul(Ms, pm_adj(P)), N.coeffs)
    num = pm_add(_scale(L.coeffs, det), -corr)
    p, m = L.shape
    return TfMatrix.from_entries(
        [[RationalTf(num[:, i, j], det) for j in range(m)] for i in range(p)]
    )


def _scale(a: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Multiply every entry of a polynomial matrix by a scalar polynomial."""
    out = np.zeros((a.shape[0] + len(poly) - 1,) + a.shape[1:])
    for k, c in enumerate(poly):
        out[k : k + a.shape[0]] += c * a
    return out


def identify_slp(y, r, ss, tau: int = 14) -> DualSlpSolution:
    """Fit ``min ||y - L r||^2`` over the dual SLP affine set.

    ``ss`` is a :class:`StateSpace` of the controller or the controller itself,
    in which case its controllable canonical realization is used.
    """
    t0 = time.perf_counter()
    ss = _as_ss(ss)
    y = as_signal(y)
    r = as_signal(r)
    n_samp, p = y.shape
    m = r.shape[1]
    if ss.D.shape != (m, p):
        raise DimensionMismatch(f"controller is {ss.D.shape}, data implies {(m, p)}")
    if r.shape[0] != n_samp:
        raise DimensionMismatch("y and r lengths differ")
    if n_samp < tau:
        raise TooShort(f"need N >= tau={tau}, got {n_samp}")
    cons = build_slp_constraints(ss, tau)
    lay = slp_layout(tau, ss.n, p, m)
    T = np.zeros((n_samp * p, lay.size))
    T[:, lay.slice("L")] = fir_regressor(r, tau, p)
    ls = solve(LsProblem(T, y.reshape(-1), cons, lay))
    R, N, M = (_full(ls.params[k], tau) for k in "RNM")
    L = FirSeq(ls.params["L"])
    diag = ls.summary()
    g_hat = recover(R, N, M, L)
    diag["solve_time_s"] = time.perf_counter() - t0
    return DualSlpSolution(R, N, M, L, g_hat, diag, tau)
