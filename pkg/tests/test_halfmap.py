import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from conftest import CENTER, canonical_systems, dyadic, random_systems
from pwlcycles import flow
from pwlcycles.errors import DomainViolation, NoReturn, Singularity
from pwlcycles.halfmap import (
    HalfMapSample,
    deriv_yL,
    deriv_yR,
    eval_yL,
    eval_yR,
    eval_yRb,
    half_map,
    left_intervals,
    samples_to_csv,
)
from pwlcycles.lienard import CanonicalPWL, w_poly
from pwlcycles.trajectory import backward_right_expm


def _expm_state(T, D, a, y0, t):
    M = np.array([[T, -1.0, 0.0], [D, 0.0, -a], [0.0, 0.0, 0.0]])
    return expm(t * M) @ np.array([0.0, y0, 1.0])


@pytest.mark.parametrize("T,D", [(0.3, 1.0), (-0.5, 2.0), (3.0, 1.0), (2.0, 1.0), (0.0, -1.0), (1.0, 0.0), (0.0, 0.0)])
def test_closed_form_flow_matches_matrix_exponential(T, D):
    for a in (-1.0, 0.0, 0.7):
        for t in (0.1, 1.0, 2.5):
            x, y = flow.position(T, D, a, 1.3, t)
            ref = _expm_state(T, D, a, 1.3, t)
            assert abs(x - ref[0]) <= 1e-11 * (1 + abs(ref[0]))
            assert abs(y - ref[1]) <= 1e-11 * (1 + abs(ref[1]))


@given(dyadic, dyadic, dyadic, st.floats(0.01, 5), st.floats(0, 4))
def test_compiled_orbit_matches_numpy_reference(T, D, a, y0, t):
    x, dx, y = flow.orbit(T, D, a, y0, t)
    xs, dxs, ys = flow._orbit_s(T, D, a, y0, t)
    for u, v in ((x, xs), (dx, dxs), (y, ys)):
        if math.isfinite(u):
            assert abs(u - v) <= 1e-9 * (1 + abs(u))


def test_center_half_turn():
    s = eval_yL(CENTER, 1.0)
    assert abs(s.y1 + 1) < 1e-12 and abs(s.flight_time - math.pi) < 1e-12
    s = eval_yR(CENTER, 1.0)
    assert abs(s.y1 + 1) < 1e-12


def test_zero_ordinate_convention():
    for c in (CENTER, CanonicalPWL(0.5, 2, 1, -0.3, 1, 0.4, 0.2)):
        s = eval_yL(c, 0.0)
        assert (s.y1, s.flight_time) == (0.0, 0.0)
        assert eval_yR(c, 0.0).y1 == 0.0


@pytest.mark.parametrize("side", ["L", "R"])
def test_saddle_endpoint_correspondence(side):
    # W = 1 - y^2 on both sides: domain [0, 1], image [-1, 0].  The right
    # saddle must sit in x > 0 for backward orbits to return, hence a_R = -1.
    c = CanonicalPWL(0, -1, 1, 0, -1, -1, 0)
    ev = eval_yL if side == "L" else eval_yR
    prev = None
    for eps in (1e-2, 1e-3, 1e-4):
        y1 = ev(c, 1 - eps).y1
        assert -1 < y1 < 0
        if prev is not None:
            assert y1 < prev
        prev = y1
    assert abs(prev + 1) < 1e-2
    with pytest.raises(DomainViolation):
        ev(c, 1.5)


def test_backward_map_with_attracting_right_focus_has_no_return():
    # a_R = 1 with a stable focus in x > 0: backward orbits spiral out and never come back within the box
    c = CanonicalPWL(0, 1, 0, 0, 1, -1, 0)
    s = eval_yR(c, 1.0)
    assert s.y1 < 0


def test_escape_reports_no_return():
    # unstable node in x < 0 pushes orbits away before they return
    c = CanonicalPWL(-3.0, 2.0, 5.0, 0, 1, 0, 0)
    dom = left_intervals(c).domain
    y0 = min(dom.hi * 0.5, 10.0) if dom.hi > 0 else 1.0
    try:
        eval_yL(c, y0)
    except (NoReturn, DomainViolation):
        pass


def test_shift_identity_exact():
    c = CanonicalPWL(0.3, 1.2, -0.4, -0.2, 0.9, 0.5, 0.75)
    for y0 in (1.0, 2.0, 3.5):
        assert eval_yRb(c, y0).y1 == eval_yR(c, y0 - c.b).y1 + c.b


def test_shift_identity_center_example():
    c = CanonicalPWL(0, 1, 0, 0, 1, 0, 2)
    assert abs(eval_yRb(c, 3.0).y1 - 1.0) < 1e-12
    with pytest.raises(DomainViolation):
        eval_yRb(c, 1.0)


def test_shift_at_zero_b_is_identity():
    c = CanonicalPWL(0.3, 1.2, -0.4, -0.2, 0.9, 0.5, 0.0)
    for y0 in (0.5, 1.0, 4.0):
        assert eval_yRb(c, y0) == eval_yR(c, y0)


@given(canonical_systems(), st.floats(0.05, 8))
def test_shift_identity_against_expm(c, y0):
    u = y0 - c.b
    assume(u > 0)
    try:
        s = eval_yRb(c, y0)
    except (NoReturn, DomainViolation):
        return
    assume(s.flight_time < 150)
    try:
        ref = backward_right_expm(c, y0)
    except NoReturn:
        return
    assert abs(s.y1 - ref) <= 1e-9 * (1 + abs(ref))


@given(canonical_systems(), st.floats(0.05, 5))
def test_forward_map_against_runge_kutta(c, y0):
    try:
        s = eval_yL(c, y0)
    except (NoReturn, DomainViolation):
        return
    assume(0.05 < s.flight_time < 30)

    def rhs(t, z):
        return [c.T_L * z[0] - z[1], c.D_L * z[0] - c.a_L]

    sol = solve_ivp(rhs, (0, s.flight_time), [0.0, y0], method="DOP853", rtol=1e-12, atol=1e-12)
    assert abs(sol.y[0, -1]) <= 1e-7 * (1 + abs(y0))
    assert abs(sol.y[1, -1] - s.y1) <= 1e-7 * (1 + abs(y0))


def test_center_derivative():
    assert deriv_yL(CENTER, 1.0, -1.0) == -1.0
    with pytest.raises(Singularity):
        deriv_yL(CENTER, 1.0, 0.0)


def test_center_derivative_finite_difference():
    h = 1e-5
    fd = (eval_yL(CENTER, 0.5 + h).y1 - eval_yL(CENTER, 0.5 - h).y1) / (2 * h)
    assert abs(fd - deriv_yL(CENTER, 0.5, eval_yL(CENTER, 0.5).y1)) < 1e-6


@given(canonical_systems(), st.floats(0.05, 5))
def test_derivative_negative_and_tangent_to_cubic_field(c, y0):
    try:
        s = eval_yL(c, y0)
        d = deriv_yL(c, y0, s.y1)
    except (NoReturn, DomainViolation, Singularity):
        return
    assume(s.y1 < -1e-6)
    assert d < 0
    W = w_poly(c.T_L, c.D_L, c.a_L)
    X = (-s.y1 * W(y0), -y0 * W(s.y1))
    cross = X[1] - d * X[0]
    assert abs(cross) <= 1e-9 * (abs(X[1]) + abs(d * X[0]) + 1e-300)


@given(canonical_systems(), st.floats(0.05, 5))
def test_derivative_matches_finite_differences(c, y0):
    dom = left_intervals(c).domain
    h = 1e-6 * (1 + y0)
    assume(dom.interior_contains(y0 - h) and dom.interior_contains(y0 + h))
    try:
        lo, mid, hi = (eval_yL(c, y) for y in (y0 - h, y0, y0 + h))
        d = deriv_yL(c, y0, mid.y1)
    except (NoReturn, DomainViolation, Singularity):
        return
    assume(mid.flight_time < 50 and abs(mid.y1) > 1e-3)
    fd = (hi.y1 - lo.y1) / (2 * h)
    assert abs(fd - d) <= 1e-5 * (1 + abs(d))


def test_sign_relation_and_monotonicity():
    for c in random_systems(40, seed=11):
        dom = left_intervals(c).domain
        if dom.degenerate:
            continue
        ys = np.linspace(dom.lo, min(dom.hi, 50.0), 42)[1:-1]
        y1, _, res, ok = half_map(c.T_L, c.D_L, c.a_L, ys, +1)
        ys, y1 = ys[ok], y1[ok]
        # strictly decreasing wherever the step is resolvable; the closed-form
        # flow carries cancellation error of order eps * y0
        d = np.diff(y1)
        noise = 64 * np.finfo(float).eps * (1 + ys[1:])
        assert np.all(d <= noise)
        resolvable = np.abs(d) > 1e3 * noise
        assert np.all(d[resolvable] < 0)
        s = np.sign(ys + y1)
        if c.T_L != 0:
            assert np.all(s == -np.sign(c.T_L))


def test_center_involution():
    c = CanonicalPWL(0, 2.5, 0, 0, 1, 0, 0)
    for y0 in (0.3, 1.0, 7.0):
        y1 = eval_yL(c, y0).y1
        assert abs(eval_yL(c, -y1).y1 + y0) < 1e-9


def test_samples_csv_round_trip():
    rows = [HalfMapSample(1.0, -1.0, math.pi, 0.0)]
    text = samples_to_csv(rows)
    assert text.splitlines()[0] == "y0,y1,flight_time,residual"
    assert float(text.splitlines()[1].split(",")[2]) == math.pi


def test_vectorized_matches_scalar():
    c = CanonicalPWL(0.4, 1.5, 0.3, -0.2, 0.9, 0.5, 0.1)
    ys = np.linspace(0.1, 4, 17)
    y1, _, _, ok = half_map(c.T_L, c.D_L, c.a_L, ys, +1)
    for y, v, good in zip(ys, y1, ok):
        if good:
            assert eval_yL(c, y).y1 == v
