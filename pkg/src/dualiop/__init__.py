"""Closed-loop identification with stabilization guarantees.

Identifiers: :func:`diop.identify` (dual input-output parameterization),
:func:`dslp.identify_slp` and :func:`dyp.identify_yp` (baselines).
"""

from .diop import DualIopSolution, build_constraints, identify, verify_closed_loop
from .dslp import DualSlpSolution, identify_slp
from .dyp import CoprimePair, DualYpSolution, identify_yp, trivial_factorization, two_stage_gb
from .lti import FirSeq, RationalTf, StateSpace, TfMatrix, closed_loop_maps, internal_stability
from .metrics import err, freq_grid
from .simulate import ClosedLoopPlant, simulate

__all__ = [
    "ClosedLoopPlant", "CoprimePair", "DualIopSolution", "DualSlpSolution", "DualYpSolution",
    "FirSeq", "RationalTf", "StateSpace", "TfMatrix", "build_constraints", "closed_loop_maps",
    "err", "freq_grid", "identify", "identify_slp", "identify_yp", "internal_stability",
    "simulate", "trivial_factorization", "two_stage_gb", "verify_closed_loop",
]
