"""Per-instance certification of the intersection-counting chain.

For T_L != 0 the orbit O_b (graph of y_L) and the curve gamma_b = {F_b = 0}
meet in at most N + k isolated points, N the noncompact branches of the conic
F~_b = 0 inside phi(U) and k the contact points with X_L.  For T_L = 0 the
orbit is the line y1 = -y0 and Bezout caps the count at 4.  Consecutive
cycles have opposite stability, so sign(F_b) changes between them and the
number of cycles is at most intersections + 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .contact import (
    RegionSpec,
    classify_conic,
    derive_F,
    derive_G,
    excluded_point,
    infinity_degeneracy,
    solve_system,
    transform_phi,
)
from .displacement import CycleSearch, find_cycles, image_interval, interval_I_b, search_grid
from .errors import DegenerateSystem, DerivationMismatch, Inconclusive, NotApplicable
from .halfmap import DEFAULT_TOL, half_map, residual_ok
from .lienard import DEFAULT_CAP, CanonicalPWL

GLOBAL_CEILING = 8
LINE_CASE_BOUND = 4
TOUCH_TOL = 1e-10
FLAT_RUN = 32
EDGE_BISECTIONS = 60  # refinement steps at each edge of the sampled part of O_b


def _sign_name(v: float) -> str:
    return "pos" if v > 0 else "neg" if v < 0 else "zero"


@dataclass
class CountReport:
    t_l_sign: str
    k_contacts: int
    n_branches: int
    intersection_bound: int
    observed_intersections: int
    observed_cycles: int
    certified: bool
    notes: list[str] = field(default_factory=list)
    tangential_touches: int = 0
    contacts_total: int = 0
    violation: bool = False

    @property
    def cycle_bound(self) -> int:
        return self.intersection_bound + 1

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CountReport":
        return cls(**d)


# ---------------------------------------------------------------- orbit vs curve


@dataclass(frozen=True)
class IntersectionTrace:
    sign_changes: int
    touches: int
    samples: int

    @property
    def total(self) -> int:
        return self.sign_changes + self.touches


def _scaled_F(c: CanonicalPWL):
    F = derive_F(c)
    big = max((abs(v) for v in F.coeffs.values()), default=0)
    return F, float(big)


def trace_intersections(
    c: CanonicalPWL,
    n: int = 2048,
    tol: float = DEFAULT_TOL,
    cap: float = DEFAULT_CAP,
) -> IntersectionTrace:
    """Sign changes and tangential touches of F_b along O_b over int(I_b)."""
    F, big = _scaled_F(c)
    if big == 0:
        raise Inconclusive("F_b vanishes identically; gamma_b is the whole plane")
    I_b = interval_I_b(c, cap)
    if I_b.degenerate:
        return IntersectionTrace(0, 0, 0)
    img = image_interval(c, cap)
    ys = search_grid(I_b, n, max(1.0, abs(c.b), abs(c.a_L), abs(c.a_R)))
    # O_b is the graph of y_L alone; whether y_R^b exists there does not matter
    def on_orbit(y):
        yl, _, res, ok = half_map(c.T_L, c.D_L, c.a_L, y, +1)
        with np.errstate(invalid="ignore"):
            keep = ok & residual_ok(res, y, yl, tol) & (yl > img.lo) & (yl < img.hi) & (yl < 0)
        return yl, keep

    yl, keep = on_orbit(ys)
    # a crossing can sit within one grid cell of where O_b enters or leaves U,
    # so each edge of the kept set is located by bisection and sampled just inside
    extra = []
    for j in np.flatnonzero(keep[1:] != keep[:-1]):
        lo, hi = float(ys[j]), float(ys[j + 1])
        inside_lo = bool(keep[j])
        for _ in range(EDGE_BISECTIONS):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if bool(on_orbit(np.array([mid]))[1][0]) == inside_lo:
                lo = mid
            else:
                hi = mid
        extra.append(lo if inside_lo else hi)
    if extra:
        ys = np.unique(np.concatenate([ys, extra]))
        yl, keep = on_orbit(ys)
    ys, yl = ys[keep], yl[keep]
    if ys.size < 2:
        return IntersectionTrace(0, 0, int(ys.size))
    # sign changes are only counted within a contiguous run of kept samples
    run_id = np.cumsum(np.concatenate([[0], np.diff(np.flatnonzero(keep)) != 1]))
    fv = F.evalf(ys, yl) / big
    # relative to the size of the individual terms, so cancellation is judged fairly
    scale = F.abs_evalf(ys, yl) / big
    flat = np.abs(fv) <= TOUCH_TOL * scale
    run = best = 0
    for m in flat:
        run = run + 1 if m else 0
        best = max(best, run)
    if best >= FLAT_RUN:
        raise Inconclusive("|F_b| stays within tolerance along an extended arc of O_b")

    sg = np.sign(fv)
    changes = 0
    for r in np.unique(run_id):
        nz = sg[(run_id == r) & (sg != 0)]
        changes += int(np.count_nonzero(nz[1:] != nz[:-1]))

    def f_on_orbit(y: float) -> float:
        y1, _, _, okk = half_map(c.T_L, c.D_L, c.a_L, [y], +1)
        if not okk[0]:
            return math.inf
        return float(F.evalf(y, y1[0]) / big)

    touches = 0
    i = np.arange(1, ys.size - 1)
    s = sg[i]
    ext = (s != 0) & (sg[i - 1] == s) & (sg[i + 1] == s)
    ext &= (s * fv[i] <= s * fv[i - 1]) & (s * fv[i] <= s * fv[i + 1])
    rise = np.maximum(np.abs(fv[i - 1] - fv[i]), np.abs(fv[i + 1] - fv[i]))
    ext &= np.abs(fv[i]) <= 4.0 * rise
    for k in i[ext]:
        sk = sg[k]
        res = minimize_scalar(
            lambda y, sk=sk: sk * f_on_orbit(y),
            bounds=(ys[k - 1], ys[k + 1]),
            method="bounded",
            options={"xatol": 1e-13 * (1 + abs(ys[k]))},
        )
        if not math.isfinite(res.fun):
            continue
        if res.fun < 0:
            changes += 2  # a hidden pair of transversal crossings
        elif res.fun <= TOUCH_TOL * _term_scale(c, F, big, res.x):
            touches += 1
    return IntersectionTrace(changes, touches, int(ys.size))


def _term_scale(c: CanonicalPWL, F, big: float, y: float) -> float:
    y1, _, _, okk = half_map(c.T_L, c.D_L, c.a_L, [y], +1)
    if not okk[0]:
        return 0.0
    return float(F.abs_evalf(y, y1[0]) / big)


def count_curve_orbit_intersections(c: CanonicalPWL, n: int = 2048, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP) -> int:
    return trace_intersections(c, n, tol, cap).total


# ---------------------------------------------------------------- separating solution


@dataclass
class SeparatingCheck:
    ok: bool
    in_sector: bool
    ends: list[str]
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def separating_solution_check(
    c: CanonicalPWL,
    n: int = 1024,
    tol: float = DEFAULT_TOL,
    cap: float = DEFAULT_CAP,
    end_tol: float = 1e-6,
) -> SeparatingCheck:
    """Check that O_b stays in its sector and ends on the boundary of U."""
    if c.T_L == 0:
        raise NotApplicable("T_L = 0: O_b is the bisector, no sector to check")
    I_b = interval_I_b(c, cap)
    if I_b.degenerate:
        raise Inconclusive("I_b has empty interior")
    ys = search_grid(I_b, n, max(1.0, abs(c.b), abs(c.a_L), abs(c.a_R)))
    y1, _, _, ok = half_map(c.T_L, c.D_L, c.a_L, ys, +1)
    if not ok.any():
        raise Inconclusive("no point of int(I_b) returns under the left flow")
    ys, y1 = ys[ok], y1[ok]
    s = -np.sign(c.T_L)
    in_sector = bool(np.all(s * (ys + y1) > 0) and np.all(y1 < 0))
    notes = []
    ends = []
    span = I_b.hi - I_b.lo
    lo_gap = ys[0] - I_b.lo
    hi_gap = I_b.hi - ys[-1]
    # the grid is clustered at the ends, so a gap larger than a few cells means
    # the half-map stopped existing before the W-based endpoint
    cell = span * 1e-3
    if lo_gap <= max(cell, end_tol):
        ends.append("lower endpoint of I_b")
    else:
        ends.append("effective lower end (orbits below it do not return)")
        notes.append(f"half-map undefined on ({I_b.lo:.6g}, {ys[0]:.6g}); boundary of U taken at the effective end")
    if not I_b.bounded:
        if hi_gap <= max(cell, end_tol) or ys[-1] > 0.5 * cap:
            ends.append("unbounded: monitored to the cap")
            notes.append(f"O_b leaves every compact set up to y0 = {ys[-1]:.6g} (cap {cap:.3g})")
            if not (y1[-1] < y1[0]):
                raise Inconclusive("O_b does not grow towards the cap")
        else:
            ends.append("effective upper end (orbits above it do not return)")
            notes.append(f"half-map undefined above y0 = {ys[-1]:.6g}")
    elif hi_gap <= max(cell, end_tol):
        ends.append("upper endpoint of I_b")
    else:
        ends.append("effective upper end (orbits above it do not return)")
        notes.append(f"half-map undefined on ({ys[-1]:.6g}, {I_b.hi:.6g})")
    if not in_sector:
        notes.append("O_b leaves the sector sign(y0 + y1) = -sign(T_L)")
    return SeparatingCheck(in_sector, in_sector, ends, notes)


# ---------------------------------------------------------------- certification


def certify(
    c: CanonicalPWL,
    search: CycleSearch | None = None,
    tol: float = DEFAULT_TOL,
    cap: float = DEFAULT_CAP,
    grid_n: int = 512,
    trace_n: int = 2048,
) -> CountReport:
    """Assemble k, N, the bounds and the observed counts for one instance."""
    if search is None:
        search = find_cycles(c, grid_n, tol, cap)
    cycles = len(search.cycles)
    notes: list[str] = []
    ok = True
    tl = _sign_name(c.T_L)

    try:
        F = derive_F(c)
    except DerivationMismatch as exc:
        return CountReport(tl, 0, 0, 0, 0, cycles, False, [f"derivation mismatch: {exc}"], violation=cycles > GLOBAL_CEILING)

    if search.continuum or F.is_zero():
        notes.append("continuum of periodic orbits: delta vanishes on an interval" if search.continuum else "F_b vanishes identically")
        bound = LINE_CASE_BOUND if c.T_L == 0 else 0
        certified = cycles == 0
        if not certified:
            notes.append("isolated cycles reported alongside an identically vanishing F_b")
        return CountReport(tl, 0, 0, bound, 0, cycles, certified, notes)
    if search.boundary_suspects:
        notes.append(f"{len(search.boundary_suspects)} boundary-suspect zero(s) not counted")

    k = n = 0
    contacts_total = 0
    if c.T_L == 0:
        bound = LINE_CASE_BOUND
        notes.append("T_L = 0: O_b lies on y1 = -y0, Bezout with a line gives at most 4 intersections")
        bad = [r.y0_star for r in search.cycles if abs(r.y0_star + r.y1_star) > max(tol, 1e-8) * (1 + abs(r.y0_star))]
        if bad:
            ok = False
            notes.append(f"cycles off the bisector at y0 = {bad}")
    else:
        G = derive_G(F, c)
        Ft, Gt = transform_phi(F), transform_phi(G)
        region = RegionSpec.build(c.T_L, interval_I_b(c, cap), image_interval(c, cap))
        try:
            sols = solve_system(Ft, Gt, region)
            k = sols.k
            contacts_total = len(sols.solutions)
            notes.extend(sols.warnings)
            if sols.uncertified_in_region:
                ok = False
                notes.append(f"{sols.uncertified_in_region} in-region contact(s) with singular Jacobian: k not certified")
            if contacts_total > 6:
                ok = False
                notes.append("more than 6 real contact solutions (Bezout exceeded)")
            if k > 5:
                ok = False
                notes.append(f"k = {k} exceeds 5")
        except DegenerateSystem as exc:
            ok = False
            notes.append(f"contact system degenerate: {exc}")
        conic = classify_conic(Ft, region)
        n = conic.in_region
        if not conic.smooth_in_quadrant:
            ok = False
            notes.append(f"conic F~_b = 0 is singular inside the quadrant ({conic.kind})")
        if c.D_L != 0:
            try:
                ex = excluded_point(c, region, Ft, Gt)
                if not (ex.outside and ex.solves_system):
                    ok = False
                    notes.append(f"excluded point check failed: {ex.to_dict()}")
            except NotApplicable:
                pass
        elif not infinity_degeneracy(Ft, Gt):
            ok = False
            notes.append("D_L = 0 but no common point at infinity")
        bound = n + k

    try:
        tr = trace_intersections(c, trace_n, tol, cap)
        observed = tr.total
        touches = tr.touches
    except Inconclusive as exc:
        ok = False
        observed, touches = 0, 0
        notes.append(f"intersection trace inconclusive: {exc}")

    if observed > bound:
        notes.append(f"observed intersections {observed} exceed N + k = {bound}")
    if cycles > observed + 1:
        notes.append(f"{cycles} cycles but only {observed} intersections")
    chain = cycles <= observed + 1 <= bound + 1 <= GLOBAL_CEILING
    certified = ok and chain
    violation = cycles > GLOBAL_CEILING or (ok and (cycles > bound + 1 or observed > bound))
    if violation:
        notes.append("bound violated")
    return CountReport(tl, k, n, bound, observed, cycles, certified, notes, touches, contacts_total, violation)
