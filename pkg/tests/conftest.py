"""Shared fixtures and strategies."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pwlcycles.lienard import CanonicalPWL

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# three nested crossing cycles, found by scripts/find_three_cycles.py
THREE_CYCLES = CanonicalPWL(0.12109375, 1.0, 1.0, -0.149658203125, 1.66748046875, 0.114501953125, 0.033447265625)
CENTER = CanonicalPWL(0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0)

# dyadic values keep exact arithmetic small and floats exact
dyadic = st.integers(-3 * 256, 3 * 256).map(lambda k: k / 256)


@st.composite
def canonical_systems(draw, **fixed):
    vals = {k: draw(dyadic) for k in ("T_L", "D_L", "a_L", "T_R", "D_R", "a_R", "b")}
    vals.update(fixed)
    return CanonicalPWL(**vals)


def random_systems(n: int, seed: int, **fixed) -> list[CanonicalPWL]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        v = np.round(rng.uniform(-3, 3, 7) * 256) / 256
        p = dict(zip(("T_L", "D_L", "a_L", "T_R", "D_R", "a_R", "b"), map(float, v)))
        p.update(fixed)
        out.append(CanonicalPWL(**p))
    return out


@pytest.fixture
def three_cycles():
    return THREE_CYCLES


@pytest.fixture
def center():
    return CENTER
