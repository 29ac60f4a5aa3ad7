"""Equality-constrained least squares shared by the three identifiers.

Decision vectors stack parameter blocks; a block of shape ``(L, a, b)`` is
flattened row-major, i.e. in ``(k, i, j)`` order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InfeasibleConstraints, TooShort
from .lti import FirSeq, as_signal

RANK_TOL = 1e-10
FEAS_TOL = 1e-8


# --------------------------------------------------------------------------
# layout and constraint bookkeeping


@dataclass
class VarLayout:
    shapes: dict = field(default_factory=dict)
    offsets: dict = field(default_factory=dict)
    size: int = 0

    def add(self, name: str, shape: tuple[int, int, int]) -> "VarLayout":
        self.shapes[name] = tuple(shape)
        self.offsets[name] = self.size
        self.size += int(np.prod(shape))
        return self

    def slice(self, name: str) -> slice:
        off = self.offsets[name]
        return slice(off, off + int(np.prod(self.shapes[name])))

    def unpack(self, x: np.ndarray) -> dict[str, np.ndarray]:
        return {name: x[self.slice(name)].reshape(shape) for name, shape in self.shapes.items()}

    def pack(self, values: dict[str, np.ndarray]) -> np.ndarray:
        x = np.zeros(self.size)
        for name, v in values.items():
            x[self.slice(name)] = np.asarray(v, dtype=float).reshape(-1)
        return x


@dataclass
class ConstraintSet:
    A: np.ndarray
    b: np.ndarray
    labels: list[str]

    def __post_init__(self):
        if self.A.shape[0] != self.b.shape[0] or len(self.labels) != self.A.shape[0]:
            raise DimensionMismatch("A, b and labels must have matching row counts")

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def residual(self, x: np.ndarray) -> float:
        if self.n_rows == 0:
            return 0.0
        return float(np.max(np.abs(self.A @ x - self.b)))


class ConstraintBuilder:
    """Accumulates linear rows ``sum_name M_name x_name = rhs``."""

    def __init__(self, layout: VarLayout):
        self.layout = layout
        self._rows: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []
        self._labels: list[str] = []

    def add(self, label: str, terms: dict[str, np.ndarray], rhs, row_tags=None) -> None:
        nrows = None
        block = None
        for name, mat in terms.items():
            mat = np.atleast_2d(mat)
            if block is None:
                nrows = mat.shape[0]
                block = np.zeros((nrows, self.layout.size))
            if mat.shape != (nrows, self.layout.slice(name).stop - self.layout.slice(name).start):
                raise DimensionMismatch(f"term {name} has shape {mat.shape}")
            block[:, self.layout.slice(name)] += mat
        self.add_rows(label, block, rhs, row_tags)

    def add_rows(self, label: str, block: np.ndarray, rhs, row_tags=None) -> None:
        """Append rows already expressed over the full decision vector."""
        block = np.atleast_2d(block)
        if block.shape[1] != self.layout.size:
            raise DimensionMismatch(f"block has {block.shape[1]} columns, layout {self.layout.size}")
        nrows = block.shape[0]
        self._rows.append(block)
        self._rhs.append(np.broadcast_to(np.asarray(rhs, dtype=float).reshape(-1), (nrows,)))
        tags = row_tags if row_tags is not None else range(nrows)
        self._labels.extend(f"{label}:{t}" for t in tags)

    def build(self) -> ConstraintSet:
        if not self._rows:
            return ConstraintSet(np.zeros((0, self.layout.size)), np.zeros(0), [])
        return ConstraintSet(np.vstack(self._rows), np.concatenate(self._rhs), self._labels)


# --------------------------------------------------------------------------
# structured matrices


def _coeff_array(coeffs) -> np.ndarray:
    if isinstance(coeffs, FirSeq):
        return coeffs.coeffs
    c = np.asarray(coeffs, dtype=float)
    return c[:, None, None] if c.ndim == 1 else c


def convolution_matrix(coeffs, tau: int, side: str = "left", n_other: int = 1) -> np.ndarray:
    """Matrix of the convolution with an FIR sequence ``K`` of ``nu`` terms.

    ``side='left'`` maps ``vec(X)`` to ``vec(K X)`` for ``X`` of shape
    ``(tau, b, n_other)``; ``side='right'`` maps ``vec(X)`` to ``vec(X K)``
    for ``X`` of shape ``(tau, n_other, a)``. The product keeps its full
    support of ``nu + tau - 1`` coefficients. For ``n_other = 1`` and the left
    side the blocks are the ``K[k]`` themselves.
    """
    k = _coeff_array(coeffs)
    nu, a, b = k.shape
    if tau < 1:
        raise ValueError("tau must be >= 1")
    eye = np.eye(n_other)
    if side == "left":
        blocks = [np.kron(k[l], eye) for l in range(nu)]
    elif side == "right":
        blocks = [np.kron(eye, k[l].T) for l in range(nu)]
    else:
        raise ValueError("side must be 'left' or 'right'")
    br, bc = blocks[0].shape
    out = np.zeros(((nu + tau - 1) * br, tau * bc))
    for col in range(tau):
        for l in range(nu):
            row = col + l
            out[row * br : (row + 1) * br, col * bc : (col + 1) * bc] = blocks[l]
    return out


def block_toeplitz(r, tau: int) -> np.ndarray:
    """``N x (m tau)`` matrix whose row ``k`` is ``[r(k)^T, r(k-1)^T, ..., r(k-tau+1)^T]``."""
    r = as_signal(r)
    n, m = r.shape
    if n < tau:
        raise TooShort(f"need at least tau={tau} samples, got {n}")
    out = np.zeros((n, m * tau))
    for i in range(tau):
        out[i:, i * m : (i + 1) * m] = r[: n - i]
    return out


def fir_regressor(r, tau: int, p: int) -> np.ndarray:
    """Regressor mapping ``vec(X)``, ``X`` of shape ``(tau, p, m)``, to ``vec(X * r)``.

    Output rows are ordered ``(t, i)``, matching ``y.reshape(-1)`` for ``y`` of
    shape ``(N, p)``.
    """
    r = as_signal(r)
    n, m = r.shape
    t3 = block_toeplitz(r, tau).reshape(n, tau, m)
    phi = np.zeros((n, p, tau, p, m))
    for i in range(p):
        phi[:, i, :, i, :] = t3
    return phi.reshape(n * p, tau * p * m)


# --------------------------------------------------------------------------
# solver


@dataclass
class LsProblem:
    T: np.ndarray
    t: np.ndarray
    constraints: ConstraintSet
    layout: VarLayout

    def __post_init__(self):
        if self.T.shape[1] != self.layout.size or self.constraints.A.shape[1] != self.layout.size:
            raise DimensionMismatch("T, A and layout disagree on the variable count")
        if self.T.shape[0] != self.t.shape[0]:
            raise DimensionMismatch("T and t row counts differ")


@dataclass
class LsSolution:
    x: np.ndarray
    constraint_residual: float
    cost: float
    rank_A: int
    rank_reduced: int
    n_free: int
    degenerate: bool
    params: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "constraint_residual": self.constraint_residual,
            "cost": self.cost,
            "rank_A": self.rank_A,
            "rank_reduced": self.rank_reduced,
            "n_free": self.n_free,
            "degenerate": self.degenerate,
        }


def nullspace_split(A: np.ndarray, b: np.ndarray, rank_tol: float = RANK_TOL):
    """Minimum-norm particular solution, nullspace basis and rank of ``A x = b``."""
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros(n), np.eye(n), 0
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    x0 = Vt[:rank].T @ ((U[:, :rank].T @ b) / s[:rank])
    res = float(np.max(np.abs(A @ x0 - b))) if A.shape[0] else 0.0
    if res > FEAS_TOL:
        raise InfeasibleConstraints(f"min-norm residual of Ax=b is {res:.3g}")
    return x0, Vt[rank:].T, rank


def solve(problem: LsProblem, rank_tol: float = RANK_TOL) -> LsSolution:
    """Minimize ``||T x - t||^2`` subject to ``A x = b`` by nullspace elimination.

    A rank-deficient reduced problem gets the minimum-norm solution and is
    flagged as ``degenerate``.
    """
    T, t = problem.T, problem.t
    A, b = problem.constraints.A, problem.constraints.b
    x0, Z, rank_a = nullspace_split(A, b, rank_tol)
    n_free = Z.shape[1]
    rank_red = 0
    x = x0
    if n_free:
        TZ = T @ Z
        w, _, rank_red, _ = np.linalg.lstsq(TZ, t - T @ x0, rcond=rank_tol)
        x = x0 + Z @ w
    res = problem.constraints.residual(x)
    resid = T @ x - t
    return LsSolution(
        x=x,
        constraint_residual=res,
        cost=float(resid @ resid),
        rank_A=rank_a,
        rank_reduced=int(rank_red),
        n_free=n_free,
        degenerate=bool(rank_red < n_free),
        params=problem.layout.unpack(x),
    )


def dump_problem(problem: LsProblem, directory) -> None:
    """Write ``A``, ``b``, ``T``, ``t`` as dense CSV files for external checks."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    np.savetxt(d / "A.csv", problem.constraints.A, delimiter=",")
    np.savetxt(d / "b.csv", problem.constraints.b, delimiter=",")
    np.savetxt(d / "T.csv", problem.T, delimiter=",")
    np.savetxt(d / "t.csv", problem.t, delimiter=",")
    (d / "labels.txt").write_text("\n".join(problem.constraints.labels) + "\n")
