import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import CENTER, THREE_CYCLES, canonical_systems, random_systems
from pwlcycles.contact import derive_F
from pwlcycles.displacement import (
    CycleSearch,
    cycles_to_csv,
    db_derivative,
    delta,
    delta_prime,
    delta_values,
    find_cycles,
    interval_I_b,
    search_grid,
)
from pwlcycles.errors import DomainViolation, NoReturn, Singularity
from pwlcycles.lienard import CanonicalPWL, DomainInterval
from pwlcycles.trajectory import close_cycle


def test_global_center_continuum():
    s = find_cycles(CENTER)
    assert s.continuum and s.cycles == []
    assert delta(CENTER, 2.0) == pytest.approx(0.0, abs=1e-12)
    assert delta_prime(CENTER, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_center_left_focus_right_has_constant_sign():
    for T_R in (0.3, -0.4):
        c = CanonicalPWL(0, 1, 0, T_R, 1, 0, 0)
        s = find_cycles(c)
        assert s.cycles == [] and not s.continuum
        ys = np.linspace(0.1, 20, 50)
        d, _, ok = delta_values(c, ys)
        # backward map through a focus with trace T_R: sign(y0 + y_R(y0)) = sign(T_R)
        assert np.all(np.sign(d[ok]) == np.sign(T_R))


def test_delta_outside_domain():
    c = CanonicalPWL(0, -1, 1, 0, 1, 0, 0)  # I_L = [0, 1]
    with pytest.raises(DomainViolation):
        delta(c, 2.0)


def test_grid_size_precondition():
    with pytest.raises(ValueError):
        find_cycles(THREE_CYCLES, grid_n=16)


def test_three_cycles_alternate_and_close():
    s = find_cycles(THREE_CYCLES)
    st_ = [r.stability for r in s.cycles]
    assert st_ == ["repelling", "attracting", "repelling"]
    for r in s.cycles:
        assert abs(r.delta_residual) <= 1e-10
        chk = close_cycle(THREE_CYCLES, r.y0_star)
        assert chk.closure_error <= 1e-6
        assert abs(chk.y1 - r.y1_star) <= 1e-6 * (1 + abs(r.y1_star))


def test_stability_matches_trajectory_direction():
    # a point just inside an attracting cycle moves outward after one turn
    s = find_cycles(THREE_CYCLES)
    att = [r for r in s.cycles if r.stability == "attracting"][0]
    inner = close_cycle(THREE_CYCLES, att.y0_star * 0.99)
    assert inner.y0_return > att.y0_star * 0.99


@given(canonical_systems(), st.floats(0.05, 6))
def test_delta_prime_matches_finite_differences(c, y0):
    I = interval_I_b(c)
    h = 1e-6 * (1 + y0)
    assume(I.interior_contains(y0 - h) and I.interior_contains(y0 + h) and abs(y0 - c.b) > 1e-3)
    try:
        d = delta_prime(c, y0)
        lo, hi = delta(c, y0 - h), delta(c, y0 + h)
    except (NoReturn, Singularity, DomainViolation):
        return
    fd = (hi - lo) / (2 * h)
    assume(abs(d) < 1e4)
    assert abs(fd - d) <= 1e-5 * (1 + abs(d))


@given(canonical_systems(), st.floats(0.05, 6))
def test_db_derivative_positive_and_matches_b_differences(c, y0):
    I = interval_I_b(c)
    assume(I.interior_contains(y0) and abs(y0 - c.b) > 1e-2)
    try:
        g = db_derivative(c, y0)
    except (NoReturn, Singularity):
        return
    assert g > 0
    h = 1e-6
    ca = CanonicalPWL(*c.as_tuple()[:6], c.b - h)
    cb = CanonicalPWL(*c.as_tuple()[:6], c.b + h)
    try:
        fd = (delta(cb, y0) - delta(ca, y0)) / (2 * h)
    except (NoReturn, DomainViolation):
        return
    assert abs(fd - g) <= 1e-5 * (1 + abs(g))


def test_db_derivative_center_example():
    assert db_derivative(CENTER, 1.0) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(Singularity):
        db_derivative(CanonicalPWL(0, 1, 0, 0, 1, 0, 0.5), 0.5)


def test_continuous_systems_have_at_most_one_cycle():
    for c in random_systems(60, seed=5, b=0.0):
        c = CanonicalPWL(c.T_L, c.D_L, c.a_L, c.T_R, c.D_R, c.a_L, 0.0)
        assert len(find_cycles(c, 256).cycles) <= 1


def test_alternation_and_ceiling_on_random_draws():
    for c in random_systems(60, seed=6):
        s = find_cycles(c, 256)
        assert len(s.cycles) <= 8
        seq = [r.stability for r in s.cycles if r.stability != "degenerate"]
        assert all(a != b for a, b in zip(seq, seq[1:]))


def test_classification_follows_F_sign():
    s = find_cycles(THREE_CYCLES)
    for r in s.cycles:
        assert (r.fprime_value < 0) == (r.stability == "attracting")
        assert np.sign(r.delta_prime) == np.sign(r.fprime_value)


def test_fold_changes_count_by_two():
    # lowering b through the fold of the inner pair removes two cycles at
    # once (raising b instead loses the inner one through y0 = b)
    counts = []
    for b in np.linspace(0.0334, 0.026, 15):
        c = CanonicalPWL(*THREE_CYCLES.as_tuple()[:6], float(b))
        s = find_cycles(c, 256)
        counts.append(sum(1 for r in s.cycles if r.y0_star < 5))
    assert counts[0] == 2 and counts[-1] == 0
    assert all(abs(a - b) in (0, 2) for a, b in zip(counts, counts[1:]))


def test_boundary_zero_reported_separately():
    # with a bounded I_b the search never counts a zero within tol of its ends
    for c in random_systems(40, seed=9):
        s = find_cycles(c, 128)
        if s.I_b is None:
            continue
        for r in s.cycles:
            assert s.I_b.interior_contains(r.y0_star)
            assert min(r.y0_star - s.I_b.lo, s.I_b.hi - r.y0_star) > s.tol


def test_search_grid_inside_interval():
    g = search_grid(DomainInterval(0.5, 1e6, True, False, False), 256, 2.0)
    assert g[0] > 0.5 and g[-1] < 1e6 and np.all(np.diff(g) > 0)
    g = search_grid(DomainInterval(0.0, 1.0, True, True, True), 64)
    assert g.size == 64 and g[0] > 0 and g[-1] < 1


def test_serialization_round_trip():
    s = find_cycles(THREE_CYCLES)
    text = s.to_json()
    assert CycleSearch.from_dict(json.loads(text)).to_json() == text
    rows = cycles_to_csv(s.cycles).splitlines()
    assert rows[0].startswith("y0_star,y1_star,stability") and len(rows) == 4
    assert json.loads(text)["continuum"] is False
