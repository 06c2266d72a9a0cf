"""End-to-end acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run alone with `pytest tests/test_acceptance.py -v -s`.  The global sweep
certifies 10^4 systems and takes about ten minutes on one core.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import CENTER, THREE_CYCLES
from pwlcycles.contact import (
    RegionSpec,
    derive_F,
    derive_G,
    displacement_numerator,
    excluded_point,
    transform_phi,
)
from pwlcycles.counting import GLOBAL_CEILING, certify
from pwlcycles.displacement import (
    db_derivative,
    delta,
    delta_prime,
    find_cycles,
    image_interval,
    interval_I_b,
)
from pwlcycles.errors import PWLError
from pwlcycles.halfmap import eval_yL, eval_yR, eval_yRb, half_map, left_intervals
from pwlcycles.lienard import CanonicalPWL
from pwlcycles.poly import Y0, Y1
from pwlcycles.sweep import STRATA, SweepConfig, default_threads, instance, run_sweep
from pwlcycles.trajectory import backward_right_expm, close_cycle

pytestmark = pytest.mark.slow


@pytest.fixture
def verdict(capsys):
    """Print one line per criterion to the terminal, bypassing capture."""

    def emit(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def _with_b(c: CanonicalPWL, b: float) -> CanonicalPWL:
    return CanonicalPWL(c.T_L, c.D_L, c.a_L, c.T_R, c.D_R, c.a_R, b)


def _richardson(f, x: float, h: float) -> float:
    """Central difference with one Richardson step, error O(h^4)."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


@pytest.fixture(scope="module")
def global_sweep():
    config = SweepConfig(n=10_000, seed=2024, strata=STRATA, grid_n=256, threads=default_threads())
    t0 = time.perf_counter()
    rows, summary = run_sweep(config)
    return rows, summary, time.perf_counter() - t0


def test_continuous_systems_have_at_most_one_cycle(verdict):
    config = SweepConfig(n=1000, seed=7, strata=("continuous",))
    t0 = time.perf_counter()
    worst = 0
    for i in range(config.n):
        _, c = instance(config, i)
        assert c.is_continuous()
        worst = max(worst, len(find_cycles(c).cycles))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1 and elapsed < 120
    verdict(1, ok, f"{config.n} continuous systems, max cycles {worst}, {elapsed:.1f} s (limit 120 s)")
    assert ok


def test_global_ceiling(verdict, global_sweep):
    rows, s, elapsed = global_sweep
    ok = s.n >= 10_000 and s.max_cycles <= GLOBAL_CEILING and s.violations == 0 and elapsed < 900
    verdict(
        2, ok,
        f"{s.n} systems, max cycles {s.max_cycles}, violations {s.violations}, "
        f"uncertified {s.uncertified}, {elapsed:.0f} s (limit 900 s)",
    )
    assert ok


def test_three_cycles_reproduced(verdict):
    search = find_cycles(THREE_CYCLES)
    report = certify(THREE_CYCLES, search)
    stab = [r.stability for r in search.cycles]
    alternating = all(a != b for a, b in zip(stab, stab[1:])) and "degenerate" not in stab
    closures = [close_cycle(THREE_CYCLES, r.y0_star).closure_error for r in search.cycles]
    ok = len(stab) == 3 and alternating and report.certified and max(closures) <= 1e-6
    verdict(3, ok, f"cycles {stab}, certified {report.certified}, max closure {max(closures, default=math.nan):.1e}")
    assert ok


def test_sign_of_y0_plus_yL(verdict):
    config = SweepConfig(n=1000, seed=17, strata=("generic", "T_L=0", "D_L=0", "a_L=0", "4D=T^2"))
    points = bad = line_points = 0
    worst_line = 0.0
    for i in range(config.n):
        _, c = instance(config, i)
        dom = left_intervals(c).domain
        if dom.degenerate:
            continue
        hi = min(dom.hi, 1e3)
        ys = np.unique(np.concatenate([np.linspace(dom.lo, hi, 26)[1:-1], np.geomspace(max(dom.lo, 1e-6), hi, 12)[1:-1]]))
        y1, _, _, ok = half_map(c.T_L, c.D_L, c.a_L, ys, +1)
        ys, y1 = ys[ok], y1[ok]
        s = ys + y1
        points += ys.size
        if c.T_L == 0:
            line_points += ys.size
            rel = np.abs(s) / np.maximum(1.0, ys)
            worst_line = max(worst_line, float(rel.max(initial=0.0)))
            bad += int(np.count_nonzero(rel > 1e-8))
        else:
            bad += int(np.count_nonzero(np.sign(s) != -np.sign(c.T_L)))
    ok = bad == 0 and config.n >= 1000 and points > 0
    verdict(
        4, ok,
        f"{config.n} systems, {points} points, {bad} failures; T_L=0 worst |y0+y_L|/max(1,y0) = {worst_line:.1e} "
        f"over {line_points} points",
    )
    assert ok


def test_delta_prime_sign_and_finite_differences(verdict):
    config = SweepConfig(n=1500, seed=23, strata=STRATA)
    zeros = sign_bad = fd_bad = 0
    worst = 0.0
    for i in range(config.n):
        _, c = instance(config, i)
        try:
            search = find_cycles(c)
        except PWLError:
            continue
        I_b = interval_I_b(c)
        for r in search.cycles:
            if r.stability == "degenerate":
                continue
            dp = delta_prime(c, r.y0_star)
            zeros += 1
            sign_bad += int(np.sign(dp) != np.sign(r.fprime_value))
            # the step follows the local scale: y0 itself or the distance to an end of I_b
            h = 1e-4 * min(r.y0_star, r.y0_star - I_b.lo, I_b.hi - r.y0_star)
            fd = _richardson(lambda y: delta(c, y), r.y0_star, h)
            err = abs(fd - dp) / abs(dp)
            worst = max(worst, err)
            fd_bad += int(err > 1e-6)
    ok = zeros >= 100 and sign_bad == 0 and fd_bad == 0
    verdict(
        5, ok,
        f"{zeros} simple zeros, sign mismatches {sign_bad}, finite-difference failures {fd_bad}, "
        f"worst relative error {worst:.1e}",
    )
    assert ok


def test_exact_division_certificate(verdict):
    rng = np.random.default_rng(31)
    n = 10_000
    bad = 0
    for _ in range(n):
        vals = [Fraction(int(rng.integers(-60, 61)), int(rng.integers(1, 40))) for _ in range(7)]
        c = CanonicalPWL(*vals)
        try:
            F = derive_F(c)
        except PWLError:
            bad += 1
            continue
        # the returned quotient must reproduce the numerator exactly
        N = displacement_numerator(c)
        if F * (Y0 - Y1) != N or not F.is_symmetric() or F.degree > 4:
            bad += 1
    ok = bad == 0
    verdict(6, ok, f"{n} exact rational draws, {bad} failed the division certificate")
    assert ok


def test_contact_bounds_on_certified_draws(verdict, global_sweep):
    rows, _, _ = global_sweep
    cert = [r for r in rows if r.certified and r.stratum != "T_L=0"]
    k = max((r.k for r in cert), default=0)
    n = max((r.N for r in cert), default=0)
    obs = max((r.observed_intersections for r in cert), default=0)
    ok = len(cert) > 0 and k <= 5 and n <= 2 and obs <= 7
    verdict(7, ok, f"{len(cert)} certified draws with T_L != 0: max k {k}, max N {n}, max intersections {obs}")
    assert ok


def test_excluded_point(verdict):
    rng = np.random.default_rng(37)
    per_case: dict[str, int] = {}
    bad = 0
    target = 600
    tries = 0
    while min((per_case.get(k, 0) for k in ("Y1>=0", "sign(Y0)=sign(T_L)", "W_L roots off int(I_L)")), default=0) < target:
        tries += 1
        assert tries < 50 * target, "could not reach every sign case"
        v = np.round(rng.uniform(-3, 3, 7) * 256) / 256
        c = CanonicalPWL(*map(float, v))
        if c.D_L == 0:
            continue
        F = derive_F(c)
        if F.is_zero():
            continue
        Ft, Gt = transform_phi(F), transform_phi(derive_G(F, c))
        region = RegionSpec.build(c.T_L, interval_I_b(c), image_interval(c))
        ex = excluded_point(c, region, Ft, Gt)
        per_case[ex.case] = per_case.get(ex.case, 0) + 1
        bad += int(not (ex.solves_system and ex.outside))
    ok = bad == 0 and len(per_case) == 3
    verdict(8, ok, f"draws per case {dict(sorted(per_case.items()))}, failures {bad}")
    assert ok


def test_monotonicity_in_b(verdict):
    config = SweepConfig(n=500, seed=41, strata=STRATA)
    points = neg = fd_bad = 0
    worst = 0.0
    for i in range(config.n):
        _, c = instance(config, i)
        I_b = interval_I_b(c)
        if I_b.degenerate:
            continue
        hi = min(I_b.hi, 1e3)
        for y0 in np.linspace(I_b.lo, hi, 10)[1:-1]:
            if abs(y0 - c.b) < 1e-3 * (1 + abs(c.b)):
                continue
            try:
                d = db_derivative(c, y0)
                # moving b by h moves y0 - b by h; keep the stencil well inside I_b
                h = 1e-4 * min(1 + abs(c.b), y0 - I_b.lo, I_b.hi - y0)
                for b in (c.b - h, c.b + h):
                    delta(_with_b(c, b), y0)  # delta must exist across the stencil
                # y_L(y0) does not move with b, so the difference quotient of delta
                # is that of y_R^b alone; dropping y_L avoids rounding at ulp(|y_L|)
                fd = _richardson(lambda b: eval_yRb(_with_b(c, b), y0).y1, c.b, h)
            except PWLError:
                continue
            points += 1
            neg += int(not d > 0)
            err = abs(fd - d) / abs(d)
            worst = max(worst, err)
            fd_bad += int(err > 1e-6)
    ok = points >= 1000 and neg == 0 and fd_bad == 0
    verdict(
        9, ok,
        f"{points} interior points, non-positive derivatives {neg}, finite-difference failures {fd_bad}, "
        f"worst relative error {worst:.1e}",
    )
    assert ok


def test_shift_identity_against_direct_integration(verdict):
    rng = np.random.default_rng(43)
    samples = bad = 0
    worst = 0.0
    while samples < 1000:
        v = np.round(rng.uniform(-3, 3, 7) * 256) / 256
        c = CanonicalPWL(*map(float, v))
        y0 = float(rng.uniform(0.05, 8.0))
        if y0 - c.b <= 0:
            continue
        try:
            shifted = eval_yR(c, y0 - c.b).y1 + c.b
            s = eval_yRb(c, y0)
        except PWLError:
            continue
        if s.flight_time >= 150:
            continue
        try:
            ref = backward_right_expm(c, y0)
        except PWLError:
            continue
        samples += 1
        err = abs(shifted - ref) / (1 + abs(ref))
        worst = max(worst, err)
        bad += int(err > 1e-9)
    ok = bad == 0
    verdict(10, ok, f"{samples} samples against a matrix-exponential integrator, failures {bad}, worst {worst:.1e}")
    assert ok


def test_center_symmetry_and_line_bound(verdict):
    worst = 0.0
    for D in (0.25, 1.0, 2.0, 7.5):
        c = CanonicalPWL(0.0, D, 0.0, 0.0, D, 0.0, 0.0)
        for y0 in np.geomspace(1e-3, 1e3, 40):
            for val in (eval_yL(c, y0).y1, eval_yR(c, y0).y1):
                worst = max(worst, abs(val + y0) / max(1.0, y0))
    bounds = {certify(CENTER).cycle_bound}
    for i in range(20):
        _, c = instance(SweepConfig(n=20, seed=47, strata=("T_L=0",)), i)
        r = certify(c, find_cycles(c, 256))
        if r.certified:
            bounds.add(r.cycle_bound)
    ok = worst <= 1e-9 and bounds == {5}
    verdict(11, ok, f"center half-map worst |y1+y0|/max(1,y0) = {worst:.1e}; T_L=0 cycle bounds {sorted(bounds)}")
    assert ok
