"""Hypothesis strategies for random stable transfer functions."""

import numpy as np
from hypothesis import strategies as st

from dualiop.lti import RationalTf


def _poly_from_roots(roots):
    return np.real(np.poly(roots)) if roots else np.ones(1)


@st.composite
def stable_poly(draw, max_deg=3, radius=0.9):
    """Monic polynomial in z^-1 with roots inside ``|z| <= radius``."""
    deg = draw(st.integers(0, max_deg))
    roots = []
    while len(roots) < deg:
        r = draw(st.floats(0.0, radius))
        th = draw(st.floats(0.0, np.pi))
        if deg - len(roots) >= 2 and draw(st.booleans()):
            z = r * np.exp(1j * th)
            roots += [z, np.conj(z)]
        else:
            roots.append(r * np.cos(th))
    return _poly_from_roots(roots)


coef = st.floats(-2.0, 2.0, allow_nan=False).map(lambda v: round(v, 6))


@st.composite
def stable_tf(draw, max_deg=3, proper_strict=False):
    den = draw(stable_poly(max_deg))
    n = draw(st.integers(1, max_deg + 1))
    num = np.array(draw(st.lists(coef, min_size=n, max_size=n)))
    if proper_strict:
        num = np.concatenate([[0.0], num])
    return RationalTf(num, den)


@st.composite
def fir_coeffs(draw, length=None, lo=-2.0, hi=2.0):
    n = length or draw(st.integers(1, 6))
    return np.array(draw(st.lists(st.floats(lo, hi, allow_nan=False), min_size=n, max_size=n)))


def random_stable_pair(rng, max_deg=2):
    """Random stable SISO (G, K) with a stable loop, drawn by rejection."""
    from dualiop.lti import internal_stability

    while True:
        def tf(strict):
            deg = rng.integers(1, max_deg + 1)
            roots = rng.uniform(-0.8, 0.8, deg)
            num = rng.normal(size=deg + 1)
            if strict:
                num[0] = 0.0
            return RationalTf(num, np.poly(roots))

        g, k = tf(True), tf(False) * 0.3
        if internal_stability(g, k):
            return g, k
