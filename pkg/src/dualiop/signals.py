"""Excitation and noise generation, plus signal CSV I/O.

Signals are ``(N, dim)`` float arrays.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadOrder, ZeroSeed
from .lti import as_signal

# Primitive polynomials over GF(2): exponents of the non-leading terms of
# x^d + ... + 1. Full period of every entry is checked in the test suite.
PRIMITIVE_POLYS = {
    2: (1, 0),
    3: (1, 0),
    4: (1, 0),
    5: (2, 0),
    6: (1, 0),
    7: (1, 0),
    8: (4, 3, 2, 0),
    9: (4, 0),
    10: (3, 0),
    11: (2, 0),
    12: (6, 4, 1, 0),
    13: (4, 3, 1, 0),
    14: (5, 3, 1, 0),
    15: (1, 0),
    16: (5, 3, 2, 0),
}


@dataclass(frozen=True)
class PrbsSpec:
    order: int
    seed: int | None = None  # None -> all ones
    amplitude: float = 1.0

    @property
    def length(self) -> int:
        return 2**self.order - 1


def lfsr_bits(order: int, seed: int | None = None, n: int | None = None) -> np.ndarray:
    """Bit stream of the Fibonacci LFSR for ``PRIMITIVE_POLYS[order]``.

    Bit ``i`` of the state holds ``a(k + i)``; the recurrence is
    ``a(k + d) = xor_{e in taps} a(k + e)``.
    """
    if order not in PRIMITIVE_POLYS:
        raise BadOrder(f"PRBS order must be in 2..16, got {order}")
    mask = (1 << order) - 1
    state = mask if seed is None else int(seed) & mask
    if state == 0:
        raise ZeroSeed("LFSR seed must be nonzero")
    taps = PRIMITIVE_POLYS[order]
    n = mask if n is None else n
    out = np.empty(n, dtype=np.int8)
    top = order - 1
    for k in range(n):
        out[k] = state & 1
        fb = 0
        for e in taps:
            fb ^= state >> e
        state = (state >> 1) | ((fb & 1) << top)
    return out


def lfsr_period(order: int, seed: int | None = None) -> int:
    """Number of steps until the LFSR state first returns to the seed."""
    mask = (1 << order) - 1
    start = mask if seed is None else int(seed) & mask
    taps = PRIMITIVE_POLYS[order]
    state, k = start, 0
    while True:
        fb = 0
        for e in taps:
            fb ^= state >> e
        state = (state >> 1) | ((fb & 1) << (order - 1))
        k += 1
        if state == start or k > mask + 1:
            return k


def prbs(spec: PrbsSpec) -> np.ndarray:
    """One period (``2^d - 1`` samples) of a maximum-length sequence, bit 1 -> +amplitude."""
    bits = lfsr_bits(spec.order, spec.seed)
    return as_signal(np.where(bits == 1, spec.amplitude, -spec.amplitude))


def gaussian(n: int, dim: int = 1, sigma: float = 1.0, seed=0) -> np.ndarray:
    """i.i.d. N(0, sigma^2) samples from ``numpy.random.default_rng(seed)`` (PCG64).

    ``seed`` may be an int or a sequence of ints (hashed by ``SeedSequence``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    return sigma * rng.standard_normal((n, dim))


def impulse(n: int, dim: int = 1, channel: int = 0) -> np.ndarray:
    x = np.zeros((n, dim))
    x[0, channel] = 1.0
    return x


def write_signal_csv(path, x) -> None:
    x = as_signal(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"ch{i}" for i in range(x.shape[1])])
        for k, row in enumerate(x):
            w.writerow([k] + [repr(float(v)) for v in row])


def read_signal_csv(path) -> np.ndarray:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1:]
