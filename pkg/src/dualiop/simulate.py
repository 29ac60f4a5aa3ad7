"""Time-domain simulation of the feedback loop ``y = G u + H e``, ``u = s K y + r``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IllPosedLoop
from .lti import CAUSAL_TOL, TfMatrix, as_signal, as_tfmatrix, filter_signal


@dataclass(frozen=True, eq=False)
class ClosedLoopPlant:
    """Plant ``G`` (p x m), controller ``K`` (m x p), noise filter ``H`` (p x p).

    ``feedback_sign`` multiplies ``K`` inside the loop; ``+1`` is the
    positive-feedback convention used by every identification routine.
    """

    G: TfMatrix
    K: TfMatrix
    H: TfMatrix
    feedback_sign: int = 1

    def __post_init__(self):
        G, K, H = (as_tfmatrix(x) for x in (self.G, self.K, self.H))
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "H", H)
        if self.feedback_sign not in (1, -1):
            raise ValueError("feedback_sign must be +1 or -1")
        p, m = G.shape
        if K.shape != (m, p):
            raise DimensionMismatch(f"K must be {(m, p)}, got {K.shape}")
        if H.shape != (p, p):
            raise DimensionMismatch(f"H must be {(p, p)}, got {H.shape}")
        dg = _feedthrough(G)
        dk = self.feedback_sign * _feedthrough(K)
        if abs(np.linalg.det(np.eye(p) - dg @ dk)) < CAUSAL_TOL:
            raise IllPosedLoop("I - D_G D_K is singular")

    @property
    def dims(self) -> tuple[int, int]:
        return self.G.shape

    @property
    def effective_K(self) -> TfMatrix:
        """Controller in the positive-feedback convention ``u = K y + r``."""
        return self.K if self.feedback_sign == 1 else -self.K


def _feedthrough(g: TfMatrix) -> np.ndarray:
    p, m = g.shape
    return np.array([[g[i, j].num[0] for j in range(m)] for i in range(p)])


class _Bank:
    """Direct-form difference equations for every entry of a transfer matrix."""

    def __init__(self, g: TfMatrix, n: int):
        p, m = g.shape
        self.items = []
        for i in range(p):
            for j in range(m):
                e = g[i, j]
                if e.is_zero:
                    continue
                b = [float(v) for v in e.num]
                a = [float(v) for v in e.den]
                self.items.append((i, j, b, a, [0.0] * n))
        self.p = p

    def past(self, k: int, x: list[list[float]]) -> list[float]:
        """Output contributions at step ``k`` excluding the direct term ``b[0] x(k)``."""
        out = [0.0] * self.p
        for i, j, b, a, hist in self.items:
            xj = x[j]
            acc = 0.0
            for l in range(1, min(len(b), k + 1)):
                acc += b[l] * xj[k - l]
            for l in range(1, min(len(a), k + 1)):
                acc -= a[l] * hist[k - l]
            hist[k] = acc  # completed in commit()
            out[i] += acc
        return out

    def commit(self, k: int, x: list[list[float]]) -> None:
        for i, j, b, a, hist in self.items:
            hist[k] += b[0] * x[j][k]


def simulate(plant: ClosedLoopPlant, r, e, discard: int = 0):
    """Zero-initial-condition simulation; returns ``(u, y)`` as ``(N, m)``, ``(N, p)``.

    The algebraic loop through the direct feedthrough terms is solved exactly
    at each step. ``discard`` drops that many leading samples from the output.
    """
    p, m = plant.dims
    r = as_signal(r)
    e = as_signal(e)
    if r.shape[1] != m or e.shape[1] != p:
        raise DimensionMismatch(f"r needs {m} channels and e needs {p}")
    if r.shape[0] != e.shape[0]:
        raise DimensionMismatch("r and e lengths differ")
    n = r.shape[0]
    s = plant.feedback_sign
    v = filter_signal(plant.H, e)

    dg = _feedthrough(plant.G)
    dk = s * _feedthrough(plant.K)
    # [I, -dg; -dk, I] [y; u] = [pg + v; s pk + r]
    loop = np.block([[np.eye(p), -dg], [-dk, np.eye(m)]])
    solve = np.linalg.inv(loop).tolist()
    gbank = _Bank(plant.G, n)
    kbank = _Bank(plant.K, n)
    y = [[0.0] * n for _ in range(p)]
    u = [[0.0] * n for _ in range(m)]
    vl = v.T.tolist()
    rl = r.T.tolist()
    size = p + m
    for k in range(n):
        pg = gbank.past(k, u)
        pk = kbank.past(k, y)
        rhs = [pg[i] + vl[i][k] for i in range(p)] + [s * pk[j] + rl[j][k] for j in range(m)]
        sol = [sum(solve[a][b] * rhs[b] for b in range(size)) for a in range(size)]
        for i in range(p):
            y[i][k] = sol[i]
        for j in range(m):
            u[j][k] = sol[p + j]
        gbank.commit(k, u)
        kbank.commit(k, y)
    u = np.asarray(u).T
    y = np.asarray(y).T
    return u[discard:], y[discard:]
