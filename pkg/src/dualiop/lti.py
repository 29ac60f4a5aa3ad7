"""Discrete-time LTI algebra in powers of z^-1.

Every polynomial is a 1-D float array ``c`` meaning ``sum_k c[k] z^-k``.
Polynomial matrices are arrays of shape ``(L, rows, cols)`` whose leading
axis is the power of z^-1; :class:`FirSeq` wraps the same layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import signal as sps

from .errors import (
    DimensionMismatch,
    IllPosedLoop,
    NonCausalInverse,
    PoleOnGrid,
    SingularConstantTerm,
)

STAB_MARGIN = 1e-8
CAUSAL_TOL = 1e-12
GRID_POLE_TOL = 1e-14
REDUCE_TOL = 1e-8


# --------------------------------------------------------------------------
# scalar polynomials


def trim(c, tol: float = 0.0) -> np.ndarray:
    """Strip trailing coefficients with ``|c| <= tol``; never returns an empty array."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(np.abs(c) > tol)
    if nz.size == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1].copy()


def poly_add(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(max(len(a), len(b)))
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def poly_eval(c, omega) -> np.ndarray:
    """Evaluate ``sum c[k] z^-k`` at ``z = e^{j omega}``."""
    return npoly.polyval(np.exp(-1j * np.asarray(omega, dtype=float)), np.asarray(c))


def _z_roots(c: np.ndarray, n_origin: int) -> np.ndarray:
    c = trim(c)
    r = np.roots(c).astype(complex) if len(c) > 1 else np.zeros(0, complex)
    return np.concatenate([r, np.zeros(max(n_origin, 0), complex)])


# --------------------------------------------------------------------------
# SISO rational transfer functions


@dataclass(frozen=True, eq=False)
class RationalTf:
    """``num(z^-1) / den(z^-1)``, stored with ``den[0] == 1``."""

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.ones(1))

    def __post_init__(self):
        num = trim(self.num)
        den = trim(self.den)
        if den[0] == 0.0:
            raise ValueError("den[0] must be nonzero: transfer function is not causal")
        num, den = num / den[0], den / den[0]
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def const(cls, g: float) -> "RationalTf":
        return cls(np.array([float(g)]))

    @classmethod
    def delay(cls, k: int = 1) -> "RationalTf":
        c = np.zeros(k + 1)
        c[k] = 1.0
        return cls(c)

    @property
    def is_fir(self) -> bool:
        return len(self.den) == 1

    @property
    def is_zero(self) -> bool:
        return len(self.num) == 1 and self.num[0] == 0.0

    def __call__(self, omega):
        return freq_response(self, omega)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        if len(self.den) == len(other.den) and np.array_equal(self.den, other.den):
            return RationalTf(poly_add(self.num, other.num), self.den)
        return RationalTf(
            poly_add(np.convolve(self.num, other.den), np.convolve(other.num, self.den)),
            np.convolve(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalTf(-self.num, self.den)

    def __sub__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        return RationalTf(np.convolve(self.num, other.num), np.convolve(self.den, other.den))

    __rmul__ = __mul__

    def inv(self) -> "RationalTf":
        if abs(self.num[0]) < CAUSAL_TOL:
            raise NonCausalInverse(f"leading numerator coefficient {self.num[0]:.3g} is zero")
        return RationalTf(self.den, self.num)

    # analysis ---------------------------------------------------------------
    def poles(self) -> np.ndarray:
        d = max(len(self.num), len(self.den)) - 1
        return _z_roots(self.den, d - (len(self.den) - 1))

    def zeros(self) -> np.ndarray:
        if self.is_zero:
            return np.zeros(0, complex)
        d = max(len(self.num), len(self.den)) - 1
        lead = np.flatnonzero(self.num)[0]
        # leading zero coefficients are delays: zeros at infinity, not finite roots
        core = self.num[lead:]
        return _z_roots(core, d - lead - (len(core) - 1))

    def is_stable(self) -> bool:
        return is_stable(self)

    def series(self, n: int) -> np.ndarray:
        """First ``n`` impulse-response coefficients by power-series long division."""
        h = np.zeros(n)
        a = self.den
        for k in range(n):
            acc = self.num[k] if k < len(self.num) else 0.0
            for i in range(1, min(k, len(a) - 1) + 1):
                acc -= a[i] * h[k - i]
            h[k] = acc
        return h

    def reduce(self, tol: float = REDUCE_TOL) -> "RationalTf":
        """Cancel pole/zero pairs closer than ``tol``. Only ever called explicitly."""
        if self.is_zero:
            return RationalTf([0.0])
        lead = np.flatnonzero(self.num)[0]
        core = self.num[lead:]
        zs = list(np.roots(trim(core)))
        ps = list(np.roots(self.den))
        kept_p = []
        for p in ps:
            if zs:
                dist = np.abs(np.asarray(zs) - p)
                j = int(np.argmin(dist))
                if dist[j] < tol:
                    zs.pop(j)
                    continue
            kept_p.append(p)
        num = np.concatenate([np.zeros(lead), core[0] * np.real(np.poly(zs)) if zs else [core[0]]])
        den = np.real(np.poly(kept_p)) if kept_p else np.ones(1)
        return RationalTf(num, den)

    # serialization ----------------------------------------------------------
    def to_text(self) -> str:
        return "num: " + _fmt(self.num) + "\nden: " + _fmt(self.den)

    @classmethod
    def from_text(cls, text: str) -> "RationalTf":
        fields = {}
        for line in text.strip().splitlines():
            if ":" in line:
                key, _, val = line.partition(":")
                fields[key.strip()] = parse_coeffs(val)
        if "num" not in fields:
            raise ValueError("missing 'num:' line")
        return cls(fields["num"], fields.get("den", np.ones(1)))

    def __repr__(self):
        return f"RationalTf(num={self.num.tolist()}, den={self.den.tolist()})"


def _fmt(c) -> str:
    return " ".join(repr(float(x)) for x in c)


def parse_coeffs(text: str) -> np.ndarray:
    return np.array([float(t) for t in text.replace(",", " ").split()], dtype=float)


def _as_rational(x) -> RationalTf | None:
    if isinstance(x, RationalTf):
        return x
    if isinstance(x, (int, float, np.floating, np.integer)):
        return RationalTf.const(float(x))
    return None


def tf_arith(a: RationalTf, b: RationalTf, op: str) -> RationalTf:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def tf_inv(f: RationalTf) -> RationalTf:
    return f.inv()


# --------------------------------------------------------------------------
# FIR sequences and polynomial matrices


@dataclass(frozen=True, eq=False)
class FirSeq:
    """Length-``tau`` sequence of ``p x m`` matrices, ``sum_k M[k] z^-k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None, None]
        if c.ndim != 3 or c.shape[0] < 1:
            raise DimensionMismatch(f"FirSeq needs shape (tau, p, m), got {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def tau(self) -> int:
        return self.coeffs.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1], self.coeffs.shape[2]

    def __getitem__(self, k):
        return self.coeffs[k]

    def __call__(self, omega):
        return freq_response(self, omega)

    def to_tf(self) -> "TfMatrix":
        p, m = self.shape
        return TfMatrix.from_entries(
            [[RationalTf(self.coeffs[:, i, j]) for j in range(m)] for i in range(p)]
        )

    def __repr__(self):
        return f"FirSeq(tau={self.tau}, shape={self.shape})"


def pm_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of polynomial matrices ``(La, p, q) x (Lb, q, m)``."""
    la, lb = a.shape[0], b.shape[0]
    out = np.zeros((la + lb - 1, a.shape[1], b.shape[2]), dtype=np.result_type(a, b))
    for i in range(la):
        out[i : i + lb] += np.matmul(a[i], b)
    return out


def pm_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((max(a.shape[0], b.shape[0]),) + a.shape[1:])
    out[: a.shape[0]] += a
    out[: b.shape[0]] += b
    return out


def pm_eye(n: int, length: int = 1) -> np.ndarray:
    out = np.zeros((length, n, n))
    out[0] = np.eye(n)
    return out


def pm_shift(a: np.ndarray, k: int) -> np.ndarray:
    """Multiply by z^-k (k >= 0) or z^|k| (k < 0, requires zero leading coefficients)."""
    if k >= 0:
        return np.concatenate([np.zeros((k,) + a.shape[1:]), a])
    if np.any(a[:-k] != 0):
        raise ValueError("shift by a positive power of z would be non-causal")
    return a[-k:].copy()


def _det(entries: list[list[np.ndarray]]) -> np.ndarray:
    n = len(entries)
    if n == 0:
        return np.ones(1)
    if n == 1:
        return entries[0][0]
    if n == 2:
        return poly_add(
            np.convolve(entries[0][0], entries[1][1]),
            -np.convolve(entries[0][1], entries[1][0]),
        )
    acc = np.zeros(1)
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in entries[1:]]
        term = np.convolve(entries[0][j], _det(minor))
        acc = poly_add(acc, term if j % 2 == 0 else -term)
    return acc


def _entries(p: np.ndarray) -> list[list[np.ndarray]]:
    return [[p[:, i, j] for j in range(p.shape[2])] for i in range(p.shape[1])]


def pm_det(p: np.ndarray) -> np.ndarray:
    if p.shape[1] != p.shape[2]:
        raise DimensionMismatch("determinant of a non-square polynomial matrix")
    return _det(_entries(p))


def pm_adj(p: np.ndarray) -> np.ndarray:
    n = p.shape[1]
    ent = _entries(p)
    cof = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(ent) if k != i]
            c = _det(minor)
            cof[j][i] = c if (i + j) % 2 == 0 else -c
    length = max(len(c) for row in cof for c in row)
    out = np.zeros((length, n, n))
    for i in range(n):
        for j in range(n):
            out[: len(cof[i][j]), i, j] = cof[i][j]
    return out


# --------------------------------------------------------------------------
# matrices of rational transfer functions


@dataclass(frozen=True, eq=False)
class TfMatrix:
    """``p x m`` grid of :class:`RationalTf`.

    ``mfd`` optionally carries a left matrix fraction ``(D, N)`` with
    ``G = D^-1 N`` (polynomial matrices). Stability tests use it in place of
    the entrywise denominators, which for fraction-built matrices contain
    factors that only cancel in exact arithmetic.
    """

    entries: tuple
    mfd: tuple | None = None

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if not rows or not rows[0]:
            raise DimensionMismatch("TfMatrix needs at least one entry")
        if any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatch("ragged TfMatrix rows")
        if not all(isinstance(e, RationalTf) for r in rows for e in r):
            raise TypeError("TfMatrix entries must be RationalTf")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_entries(cls, rows, mfd=None) -> "TfMatrix":
        return cls(tuple(tuple(_as_rational(e) or e for e in r) for r in rows), mfd)

    @classmethod
    def siso(cls, f) -> "TfMatrix":
        return cls(((_as_rational(f) or f,),))

    @classmethod
    def identity(cls, n: int) -> "TfMatrix":
        return cls.from_entries([[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, p: int, m: int) -> "TfMatrix":
        return cls.from_entries([[0.0] * m for _ in range(p)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    @property
    def is_siso(self) -> bool:
        return self.shape == (1, 1)

    def __getitem__(self, ij) -> RationalTf:
        i, j = ij
        return self.entries[i][j]

    def __call__(self, omega):
        return freq_response(self, omega)

    def scalar(self) -> RationalTf:
        if not self.is_siso:
            raise DimensionMismatch(f"expected 1x1, got {self.shape}")
        return self.entries[0][0]

    def map(self, fn) -> "TfMatrix":
        return TfMatrix(tuple(tuple(fn(e) for e in r) for r in self.entries))

    def __neg__(self):
        return self.map(lambda e: -e)

    def __add__(self, other):
        other = as_tfmatrix(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        p, m = self.shape
        return TfMatrix(
            tuple(tuple(self[i, j] + other[i, j] for j in range(m)) for i in range(p))
        )

    def __sub__(self, other):
        return self + (-as_tfmatrix(other))

    def __matmul__(self, other):
        other = as_tfmatrix(other)
        p, q = self.shape
        q2, m = other.shape
        if q != q2:
            raise DimensionMismatch(f"{self.shape} @ {other.shape}")
        rows = []
        for i in range(p):
            row = []
            for j in range(m):
                acc = self[i, 0] * other[0, j]
                for k in range(1, q):
                    acc = acc + self[i, k] * other[k, j]
                row.append(acc)
            rows.append(row)
        return TfMatrix.from_entries(rows)

    def is_stable(self) -> bool:
        return is_stable(self)

    def to_text(self) -> str:
        p, m = self.shape
        blocks = [f"shape: {p} {m}"]
        for i in range(p):
            for j in range(m):
                blocks.append(f"[{i},{j}]\n" + self[i, j].to_text())
        return "\n".join(blocks)

    @classmethod
    def from_text(cls, text: str) -> "TfMatrix":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines[0].startswith("shape:"):
            return cls.siso(RationalTf.from_text(text))
        p, m = (int(t) for t in lines[0].split(":")[1].split())
        grid = [[None] * m for _ in range(p)]
        i = 1
        while i < len(lines):
            ij = lines[i].strip().strip("[]").split(",")
            grid[int(ij[0])][int(ij[1])] = RationalTf.from_text("\n".join(lines[i + 1 : i + 3]))
            i += 3
        return cls.from_entries(grid)

    def __repr__(self):
        return f"TfMatrix(shape={self.shape})"


TfLike = Union[RationalTf, TfMatrix, FirSeq, float]


def as_tfmatrix(x) -> TfMatrix:
    if isinstance(x, TfMatrix):
        return x
    if isinstance(x, FirSeq):
        return x.to_tf()
    r = _as_rational(x)
    if r is None:
        raise TypeError(f"cannot interpret {type(x).__name__} as a transfer function")
    return TfMatrix.siso(r)


def fir_of(x) -> FirSeq | None:
    """Return the FIR coefficients of ``x`` when every entry is a polynomial."""
    if isinstance(x, FirSeq):
        return x
    g = as_tfmatrix(x)
    if not all(e.is_fir for r in g.entries for e in r):
        return None
    p, m = g.shape
    length = max(len(e.num) for r in g.entries for e in r)
    c = np.zeros((length, p, m))
    for i in range(p):
        for j in range(m):
            c[: len(g[i, j].num), i, j] = g[i, j].num
    return FirSeq(c)


def freq_response(f, omega):
    """Frequency response at ``z = e^{j omega}``.

    Scalar ``omega`` gives a complex scalar (RationalTf) or ``(p, m)`` array;
    array ``omega`` prepends its shape.
    """
    if isinstance(f, RationalTf):
        den = poly_eval(f.den, omega)
        if np.any(np.abs(den) < GRID_POLE_TOL):
            raise PoleOnGrid("denominator vanishes on the evaluation grid")
        return poly_eval(f.num, omega) / den
    if isinstance(f, FirSeq):
        w = np.asarray(omega, dtype=float)
        zinv = np.exp(-1j * w)[..., None]
        powers = zinv ** np.arange(f.tau)
        return np.tensordot(powers, f.coeffs, axes=([-1], [0]))
    g = as_tfmatrix(f)
    w = np.asarray(omega, dtype=float)
    p, m = g.shape
    out = np.empty(w.shape + (p, m), dtype=complex)
    for i in range(p):
        for j in range(m):
            out[..., i, j] = freq_response(g[i, j], w)
    return out


def poles(f) -> np.ndarray:
    if isinstance(f, RationalTf):
        return f.poles()
    if isinstance(f, FirSeq):
        return np.zeros(f.tau - 1, complex)
    g = as_tfmatrix(f)
    return np.concatenate([e.poles() for r in g.entries for e in r])


def is_stable(f) -> bool:
    """All poles strictly inside ``|z| < 1 - STAB_MARGIN``."""
    if isinstance(f, FirSeq):
        return True
    if isinstance(f, RationalTf):
        if f.is_fir:
            return True
        return bool(np.all(np.abs(f.poles()) < 1.0 - STAB_MARGIN))
    return all(is_stable(e) for r in as_tfmatrix(f).entries for e in r)


def stable_poly(c) -> bool:
    """True when ``c(z^-1)`` has all its roots (in z) strictly inside the margin."""
    return bool(np.all(np.abs(_z_roots(c, 0)) < 1.0 - STAB_MARGIN))


# --------------------------------------------------------------------------
# signals


def as_signal(x) -> np.ndarray:
    """Coerce to a ``(N, dim)`` float array."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1:
        raise DimensionMismatch(f"signal must be (N, dim), got shape {a.shape}")
    return a


def filter_signal(f, x) -> np.ndarray:
    """Zero-initial-condition filtering; returns an ``(N, p)`` array."""
    x = as_signal(x)
    if isinstance(f, FirSeq):
        p, m = f.shape
        if m != x.shape[1]:
            raise DimensionMismatch(f"filter has {m} inputs, signal has {x.shape[1]}")
        out = np.zeros((x.shape[0], p))
        for i in range(p):
            for j in range(m):
                out[:, i] += sps.lfilter(f.coeffs[:, i, j], [1.0], x[:, j])
        return out
    g = as_tfmatrix(f)
    p, m = g.shape
    if m != x.shape[1]:
        raise DimensionMismatch(f"filter has {m} inputs, signal has {x.shape[1]}")
    out = np.zeros((x.shape[0], p))
    for i in range(p):
        for j in range(m):
            e = g[i, j]
            if not e.is_zero:
                out[:, i] += sps.lfilter(e.num, e.den, x[:, j])
    return out


# --------------------------------------------------------------------------
# matrix fractions and closed loops


def _row_common_dens(g: TfMatrix, axis: int):
    """Per-row (axis=0) or per-column (axis=1) products of distinct denominators."""
    p, m = g.shape
    outer = p if axis == 0 else m
    inner = m if axis == 0 else p
    dens, nums = [], {}
    for a in range(outer):
        uniq: list[np.ndarray] = []
        for b in range(inner):
            e = g[a, b] if axis == 0 else g[b, a]
            if not any(len(u) == len(e.den) and np.array_equal(u, e.den) for u in uniq):
                uniq.append(e.den)
        d = np.ones(1)
        for u in uniq:
            d = np.convolve(d, u)
        dens.append(d)
        for b in range(inner):
            e = g[a, b] if axis == 0 else g[b, a]
            rest = np.ones(1)
            skipped = False
            for u in uniq:
                if not skipped and len(u) == len(e.den) and np.array_equal(u, e.den):
                    skipped = True
                    continue
                rest = np.convolve(rest, u)
            nums[(a, b)] = np.convolve(e.num, rest)
    return dens, nums


def _stack(polys: dict, shape) -> np.ndarray:
    length = max(len(c) for c in polys.values())
    out = np.zeros((length,) + shape)
    for (i, j), c in polys.items():
        out[: len(c), i, j] = c
    return out


def left_mfd(g) -> tuple[np.ndarray, np.ndarray]:
    """``(D, N)`` polynomial matrices with ``G = D^-1 N``."""
    g = as_tfmatrix(g)
    if g.mfd is not None:
        return g.mfd
    p, m = g.shape
    dens, nums = _row_common_dens(g, axis=0)
    d = _stack({(i, i): dens[i] for i in range(p)}, (p, p))
    n = _stack(nums, (p, m))
    return d, n


def right_mfd(k) -> tuple[np.ndarray, np.ndarray]:
    """``(N, D)`` polynomial matrices with ``K = N D^-1``."""
    k = as_tfmatrix(k)
    p, m = k.shape
    dens, nums = _row_common_dens(k, axis=1)
    d = _stack({(j, j): dens[j] for j in range(m)}, (m, m))
    n = _stack({(i, j): c for (j, i), c in nums.items()}, (p, m))
    return n, d


class ClosedLoopMaps(NamedTuple):
    W: TfMatrix
    X: TfMatrix
    Y: TfMatrix
    Z: TfMatrix
    char_poly: np.ndarray


def _fraction(nummat: np.ndarray, den: np.ndarray) -> TfMatrix:
    _, p, m = nummat.shape
    return TfMatrix.from_entries(
        [[RationalTf(nummat[:, i, j], den) for j in range(m)] for i in range(p)]
    )


def closed_loop_maps(G, K) -> ClosedLoopMaps:
    """The four closed-loop maps of ``y = G u + v``, ``u = K y + r``.

    With ``G = Dg^-1 Ng``, ``K = Nk Dk^-1`` and ``Delta = Dg Dk - Ng Nk``:
    ``W = Dk Delta^-1 Dg``, ``X = Dk Delta^-1 Ng``, ``Y = Nk Delta^-1 Dg``,
    ``Z = I + Nk Delta^-1 Ng``; all four share the denominator ``det Delta``.
    """
    G = as_tfmatrix(G)
    K = as_tfmatrix(K)
    p, m = G.shape
    if K.shape != (m, p):
        raise DimensionMismatch(f"G is {G.shape}, K must be {(m, p)}, got {K.shape}")
    dg, ng = left_mfd(G)
    nk, dk = right_mfd(K)
    delta = pm_add(pm_mul(dg, dk), -pm_mul(ng, nk))
    if abs(np.linalg.det(delta[0])) < CAUSAL_TOL:
        raise IllPosedLoop("I - G(inf) K(inf) is singular")
    det = pm_det(delta)
    adj = pm_adj(delta)
    w = pm_mul(pm_mul(dk, adj), dg)
    x = pm_mul(pm_mul(dk, adj), ng)
    y = pm_mul(pm_mul(nk, adj), dg)
    z = pm_add(pm_mul(pm_mul(nk, adj), ng), det[:, None, None] * np.eye(m))
    return ClosedLoopMaps(
        _fraction(w, det), _fraction(x, det), _fraction(y, det), _fraction(z, det), trim(det)
    )


def internal_stability(G, K) -> bool:
    maps = closed_loop_maps(G, K)
    return all(is_stable(t) for t in maps[:4])


def polymatrix_inverse(P) -> TfMatrix:
    """Inverse of a square polynomial matrix (n <= 4) as ``adj(P) / det(P)``."""
    c = P.coeffs if isinstance(P, FirSeq) else np.asarray(P, dtype=float)
    n = c.shape[1]
    if c.shape[2] != n:
        raise DimensionMismatch("polymatrix_inverse needs a square matrix")
    if n > 4:
        raise ValueError("polymatrix_inverse supports n <= 4")
    if abs(np.linalg.det(c[0])) < CAUSAL_TOL:
        raise SingularConstantTerm("constant coefficient matrix is singular")
    return TfMatrix(_fraction(pm_adj(c), pm_det(c)).entries, mfd=(c, pm_eye(n)))


# --------------------------------------------------------------------------
# state space


@dataclass(frozen=True, eq=False)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = np.asarray(self.A).size and np.asarray(self.A).shape[0]
        A = np.asarray(self.A, dtype=float).reshape(n, n)
        B = np.asarray(self.B, dtype=float).reshape(n, D.shape[1])
        C = np.asarray(self.C, dtype=float).reshape(D.shape[0], n)
        for name, v in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def freq_response(self, omega):
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.empty(w.shape + self.D.shape, dtype=complex)
        eye = np.eye(self.n)
        for idx, wk in np.ndenumerate(w):
            z = np.exp(1j * wk)
            out[idx] = self.D + (self.C @ np.linalg.solve(z * eye - self.A, self.B) if self.n else 0)
        return out if np.ndim(omega) else out[0]

    def similarity(self, T) -> "StateSpace":
        T = np.asarray(T, dtype=float)
        Ti = np.linalg.inv(T)
        return StateSpace(T @ self.A @ Ti, T @ self.B, self.C @ Ti, self.D)


def controllable_canonical(f: RationalTf) -> StateSpace:
    f = _as_rational(f)
    n = max(len(f.num), len(f.den)) - 1
    b = np.zeros(n + 1)
    a = np.zeros(n + 1)
    b[: len(f.num)] = f.num
    a[: len(f.den)] = f.den
    d = b[0]
    c = b[1:] - d * a[1:]
    A = np.zeros((n, n))
    if n:
        A[:-1, 1:] = np.eye(n - 1)
        A[-1, :] = -a[1:][::-1]
    B = np.zeros((n, 1))
    if n:
        B[-1, 0] = 1.0
    return StateSpace(A, B, c[::-1].reshape(1, n), np.array([[d]]))


def realize(k) -> StateSpace:
    """Block-diagonal composition of per-entry controllable canonical forms."""
    k = as_tfmatrix(k)
    p, m = k.shape
    blocks = [(i, j, controllable_canonical(k[i, j])) for i in range(p) for j in range(m)]
    n = sum(s.n for _, _, s in blocks)
    A = np.zeros((n, n))
    B = np.zeros((n, m))
    C = np.zeros((p, n))
    D = np.zeros((p, m))
    off = 0
    for i, j, s in blocks:
        A[off : off + s.n, off : off + s.n] = s.A
        B[off : off + s.n, j] = s.B[:, 0]
        C[i, off : off + s.n] = s.C[0]
        D[i, j] = s.D[0, 0]
        off += s.n
    return StateSpace(A, B, C, D)

