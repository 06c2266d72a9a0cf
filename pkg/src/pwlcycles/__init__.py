"""Crossing limit cycles of planar piecewise linear systems with two zones.

The main entry points are `canonical_of` (reduce a system to Lienard form),
`find_cycles` (zeros of the displacement function) and `certify` (check the
observed cycles against the contact and intersection counts).
"""

from .counting import CountReport, certify
from .displacement import CycleRecord, CycleSearch, find_cycles
from .errors import (
    DegenerateSystem,
    DerivationMismatch,
    DomainViolation,
    Inconclusive,
    NoCrossingDynamics,
    NoReturn,
    NotApplicable,
    NotSymmetric,
    PWLError,
    Singularity,
    SpecFileError,
)
from .halfmap import eval_yL, eval_yR, eval_yRb
from .lienard import CanonicalPWL, GeneralPWL, canonical_of, load_system, to_canonical

__all__ = [
    "CanonicalPWL",
    "CountReport",
    "CycleRecord",
    "CycleSearch",
    "DegenerateSystem",
    "DerivationMismatch",
    "DomainViolation",
    "GeneralPWL",
    "Inconclusive",
    "NoCrossingDynamics",
    "NoReturn",
    "NotApplicable",
    "NotSymmetric",
    "PWLError",
    "Singularity",
    "SpecFileError",
    "canonical_of",
    "certify",
    "eval_yL",
    "eval_yR",
    "eval_yRb",
    "find_cycles",
    "load_system",
    "to_canonical",
]
