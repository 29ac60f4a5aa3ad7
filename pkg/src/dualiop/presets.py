"""Benchmark SISO system and the nominal plants used by the dual-Youla baseline."""

import numpy as np

from .lti import RationalTf, TfMatrix
from .simulate import ClosedLoopPlant

G0 = RationalTf([1.0], [1.0, -1.6, 0.89])
# Literal controller; it stabilizes G0 only under negative feedback.
K0 = RationalTf([0.0, 1.0, -0.8])
# The trailing constants are read as z^-3 coefficients, so that the
# denominator factors as (z - 0.75)(z^2 - 1.6 z + 0.89).
H0 = RationalTf([1.0, -1.56, 1.045, -0.3338], [1.0, -2.35, 2.09, -0.6675])

G_A = RationalTf([0.0])
# -1 / (1 + 0.5 z^-1): pole at -0.5 and stabilized by the benchmark controller.
G_C = RationalTf([-1.0], [1.0, 0.5])
# -z^-1 / (1 + 0.5 z^-1) is NOT stabilized by it in either feedback convention.
G_C_LITERAL = RationalTf([0.0, -1.0], [1.0, 0.5])

TAU = 14


def benchmark_plant(feedback_sign: int = 1) -> ClosedLoopPlant:
    """``(G0, K, H0)`` with ``K`` chosen so the loop is stable in either convention.

    ``feedback_sign=+1`` uses ``K = -K0`` inside ``u = K y + r``;
    ``feedback_sign=-1`` uses the literal ``K0`` under negative feedback.
    """
    k = -K0 if feedback_sign == 1 else K0
    return ClosedLoopPlant(
        TfMatrix.siso(G0), TfMatrix.siso(k), TfMatrix.siso(H0), feedback_sign
    )


def benchmark_controller() -> RationalTf:
    """Controller in the positive-feedback convention, ``-(z^-1 - 0.8 z^-2)``."""
    return -K0


def closed_loop_impulse(n: int) -> np.ndarray:
    """``(k + 1) 0.3^k``: impulse response of the benchmark reference-to-output map."""
    k = np.arange(n)
    return (k + 1) * 0.3**k
