"""Relative frequency-domain error and Bode tables."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .lti import as_tfmatrix, freq_response

MIN_GAIN = 1e-14


@dataclass(frozen=True)
class FreqGrid:
    omegas: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("grid must be a non-empty 1-d array")
        if np.any(w <= 0) or np.any(w >= np.pi) or np.any(np.diff(w) <= 0):
            raise ValueError("grid must be strictly increasing inside (0, pi)")
        object.__setattr__(self, "omegas", w)

    @property
    def L(self) -> int:
        return self.omegas.size


def freq_grid(n: int) -> FreqGrid:
    """``L = (n + 1) / 2`` points ``i pi / (L + 1)``, ``i = 1..L``."""
    if n < 1 or n % 2 == 0:
        raise ValueError("data length must be a positive odd integer")
    L = (n + 1) // 2
    return FreqGrid(np.pi * np.arange(1, L + 1) / (L + 1))


def uniform_grid(points: int) -> FreqGrid:
    return FreqGrid(np.pi * np.arange(1, points + 1) / (points + 1))


@dataclass(frozen=True)
class ErrReport:
    err_sum: float
    err_mean: float
    err_ratio: float


def _norms(resp: np.ndarray) -> np.ndarray:
    # spectral norm per frequency; modulus for 1x1
    return np.linalg.norm(resp, ord=2, axis=(-2, -1))


def err(g0, g_hat, grid: FreqGrid) -> ErrReport:
    """Relative error ``||G0 - G||_2 / ||G0||_2`` in percent: summed, averaged, and as a ratio of sums."""
    a = freq_response(as_tfmatrix(g0), grid.omegas)
    b = freq_response(as_tfmatrix(g_hat), grid.omegas)
    n0 = _norms(a)
    if np.any(n0 <= MIN_GAIN):
        raise ValueError("reference gain vanishes on the grid")
    nd = _norms(a - b)
    s = 100.0 * float(np.sum(nd / n0))
    return ErrReport(err_sum=s, err_mean=s / grid.L, err_ratio=100.0 * float(nd.sum() / n0.sum()))


@dataclass(frozen=True)
class BodeTable:
    omega: np.ndarray
    mag_db: np.ndarray  # (L, p, m)
    phase_deg: np.ndarray  # (L, p, m)


def bode_data(f, grid: FreqGrid) -> BodeTable:
    resp = freq_response(as_tfmatrix(f), grid.omegas)
    with np.errstate(divide="ignore"):
        mag = 20.0 * np.log10(np.abs(resp))
    phase = np.degrees(np.unwrap(np.angle(resp), axis=0))
    return BodeTable(grid.omegas, mag, phase)


def write_bode_csv(path, table: BodeTable, entry: tuple[int, int] = (0, 0)) -> None:
    i, j = entry
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "mag_db", "phase_deg"])
        for k in range(table.omega.size):
            w.writerow([repr(float(table.omega[k])), repr(float(table.mag_db[k, i, j])), repr(float(table.phase_deg[k, i, j]))])
