"""Displacement function delta_b(y0) = y_R(y0 - b) + b - y_L(y0) and its zeros."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Literal

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .contact import derive_F
from .errors import DomainViolation, NoReturn, Singularity
from .halfmap import DEFAULT_TOL, eval_yL, eval_yR, half_map, left_intervals, residual_ok, right_intervals
from .lienard import DEFAULT_CAP, CanonicalPWL, DomainInterval, w_poly

log = logging.getLogger(__name__)

Stability = Literal["attracting", "repelling", "degenerate"]

CONTINUUM_RUN = 32
DEGENERATE_F = 1e-8
BISECT_RTOL = 1e-12


@dataclass(frozen=True)
class CycleRecord:
    y0_star: float
    y1_star: float
    stability: Stability
    delta_residual: float
    fprime_value: float  # F_b at the cycle, coefficients scaled to max |m_i| = 1
    delta_prime: float = math.nan


@dataclass
class CycleSearch:
    cycles: list[CycleRecord]
    continuum: bool
    boundary_suspects: list[CycleRecord] = field(default_factory=list)
    I_b: DomainInterval | None = None
    searched: list[tuple[float, float]] = field(default_factory=list)
    grid_n: int = 512
    tol: float = DEFAULT_TOL
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "continuum": self.continuum,
            "cycles": [asdict(r) for r in self.cycles],
            "boundary_suspects": [asdict(r) for r in self.boundary_suspects],
            "I_b": None if self.I_b is None else self.I_b.to_dict(),
            "searched": [list(w) for w in self.searched],
            "grid_n": self.grid_n,
            "tol": self.tol,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CycleSearch":
        return cls(
            cycles=[CycleRecord(**r) for r in d["cycles"]],
            continuum=d["continuum"],
            boundary_suspects=[CycleRecord(**r) for r in d["boundary_suspects"]],
            I_b=None if d["I_b"] is None else DomainInterval(**d["I_b"]),
            searched=[tuple(w) for w in d["searched"]],
            grid_n=d["grid_n"],
            tol=d["tol"],
            warnings=list(d["warnings"]),
        )


def cycles_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(CycleRecord)])
    for r in records:
        w.writerow([v if isinstance(v, str) else f"{v:.17g}" for v in (getattr(r, f.name) for f in fields(CycleRecord))])
    return buf.getvalue()


# ---------------------------------------------------------------- evaluation


def interval_I_b(c: CanonicalPWL, cap: float = DEFAULT_CAP) -> DomainInterval:
    """I_L intersected with I_R + b."""
    return left_intervals(c, cap).domain.intersect(right_intervals(c, cap).domain.shift(c.b))


def image_interval(c: CanonicalPWL, cap: float = DEFAULT_CAP) -> DomainInterval:
    """Intersection of the images of y_L and y_R^b (read off the W roots)."""
    return left_intervals(c, cap).image.intersect(right_intervals(c, cap).image.shift(c.b))


def delta_values(c: CanonicalPWL, y0, tol: float = DEFAULT_TOL):
    """Vectorized delta on an array; returns (delta, y_L, ok)."""
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    yl, _, rl, okl = half_map(c.T_L, c.D_L, c.a_L, y0, +1)
    u = y0 - c.b
    yr, _, rr, okr = half_map(c.T_R, c.D_R, c.a_R, u, -1)
    ok = okl & okr & residual_ok(rl, y0, yl, tol) & residual_ok(rr, u, yr, tol)
    d = np.where(ok, yr + c.b - yl, np.nan)
    return d, np.where(ok, yl, np.nan), ok


def delta(c: CanonicalPWL, y0: float, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP) -> float:
    if not interval_I_b(c, cap).contains(y0):
        raise DomainViolation(f"delta: y0 = {y0!r} outside I_b")
    yl = eval_yL(c, y0, tol, cap)
    yr = eval_yR(c, y0 - c.b, tol, cap)
    return (yr.y1 + c.b) - yl.y1


def _yR_slope(c: CanonicalPWL, u: float, yr: float) -> float:
    W = w_poly(c.T_R, c.D_R, c.a_R)
    if yr == 0 or W(u) == 0:
        raise Singularity(f"backward map slope undefined at ({u!r}, {yr!r})")
    return u * W(yr) / (yr * W(u))


def _yL_slope(c: CanonicalPWL, y0: float, y1: float) -> float:
    W = w_poly(c.T_L, c.D_L, c.a_L)
    if y1 == 0 or W(y0) == 0:
        raise Singularity(f"forward map slope undefined at ({y0!r}, {y1!r})")
    return y0 * W(y1) / (y1 * W(y0))


def delta_prime(c: CanonicalPWL, y0: float, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP) -> float:
    """y_R'(y0 - b) - y_L'(y0), both slopes from the half-map differential equation."""
    if not interval_I_b(c, cap).interior_contains(y0):
        raise DomainViolation(f"delta_prime: y0 = {y0!r} outside int(I_b)")
    yl = eval_yL(c, y0, tol, cap).y1
    u = y0 - c.b
    yr = eval_yR(c, u, tol, cap).y1
    return _yR_slope(c, u, yr) - _yL_slope(c, y0, yl)


def db_derivative(c: CanonicalPWL, y0: float, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP) -> float:
    """d delta_b / d b = 1 - y_R'(y0 - b)."""
    if y0 == c.b:
        raise Singularity("d delta / d b is singular at y0 = b")
    if not interval_I_b(c, cap).interior_contains(y0):
        raise DomainViolation(f"db_derivative: y0 = {y0!r} outside int(I_b)")
    u = y0 - c.b
    yr = eval_yR(c, u, tol, cap).y1
    return 1.0 - _yR_slope(c, u, yr)


# ---------------------------------------------------------------- grid


def search_grid(I: DomainInterval, n: int, scale: float = 1.0) -> np.ndarray:
    """n points in the open interval, clustered at finite endpoints.

    Bounded intervals use a cosine map; truncated ones a sinh map that
    spreads points geometrically towards the cap.
    """
    u = (np.arange(n) + 0.5) / n
    lo, hi = I.lo, I.hi
    if I.bounded:
        y = lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * u))
    else:
        s = max(scale, 1e-3)
        # cosine clustering at lo, sinh stretching towards the cap
        v = 0.5 * (1.0 - np.cos(0.5 * np.pi * u)) * 2.0
        v = np.minimum(v, 1.0)
        y = lo + s * np.sinh(v * math.asinh((hi - lo) / s))
    y = np.unique(y[(y > lo) & (y < hi)])
    return y


def _f_scaled(c: CanonicalPWL):
    F = derive_F(c)
    big = max((abs(v) for v in F.coeffs.values()), default=0)
    if big == 0:
        return F, 0.0
    return F, float(big)


# ---------------------------------------------------------------- search


def find_cycles(
    c: CanonicalPWL,
    grid_n: int = 512,
    tol: float = DEFAULT_TOL,
    cap: float = DEFAULT_CAP,
) -> CycleSearch:
    """Isolate the zeros of delta_b on int(I_b) and classify the cycles."""
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    I_b = interval_I_b(c, cap)
    out = CycleSearch([], False, [], I_b, [], grid_n, tol, [])
    if I_b.degenerate:
        out.warnings.append("I_b has empty interior")
        return out

    scale = max(1.0, abs(c.b), abs(c.a_L), abs(c.a_R))
    ys = search_grid(I_b, grid_n, scale)
    d, _, ok = delta_values(c, ys, tol)
    if not ok.any():
        out.warnings.append("no grid point of int(I_b) has both half-maps defined")
        return out
    if not ok.all():
        out.warnings.append(f"{int((~ok).sum())} of {ys.size} grid points without a return; searchable domain shrunk")
        log.info("find_cycles: %s", out.warnings[-1])

    # maximal runs of successful evaluations, their edges pushed towards the failures
    runs = _runs(ok)
    pieces = []
    for i0, i1 in runs:
        xs, ds = ys[i0:i1], d[i0:i1]
        if i0 > 0:
            x, v = _push_edge(c, ys[i0 - 1], ys[i0], tol)
            if x is not None:
                xs, ds = np.concatenate([[x], xs]), np.concatenate([[v], ds])
        if i1 < ys.size:
            x, v = _push_edge(c, ys[i1], ys[i1 - 1], tol)
            if x is not None:
                xs, ds = np.concatenate([xs, [x]]), np.concatenate([ds, [v]])
        pieces.append((xs, ds))
        out.searched.append((float(xs[0]), float(xs[-1])))

    for xs, ds in pieces:
        small = np.abs(ds) <= tol * (1 + np.abs(xs))
        if _longest_true(small) >= CONTINUUM_RUN:
            out.continuum = True
            out.warnings.append("delta vanishes on a subinterval: continuum of periodic orbits")
            return out

    roots: list[float] = []
    for xs, ds in pieces:
        xs, ds = _refine_extrema(c, xs, ds, tol)
        roots.extend(_bracket_and_bisect(c, xs, ds, tol))
    roots.sort()

    F, Fscale = _f_scaled(c)
    lo_eff = [w[0] for w in out.searched]
    hi_eff = [w[1] for w in out.searched]
    for r in roots:
        rec = _record(c, r, F, Fscale, tol)
        if rec is None:
            continue
        near = _near(r, [I_b.lo, I_b.hi] + lo_eff + hi_eff, tol)
        (out.boundary_suspects if near else out.cycles).append(rec)
    return out


def _near(x: float, ends, tol: float) -> bool:
    return any(abs(x - e) <= tol * (1 + abs(e)) for e in ends)


def _runs(ok: np.ndarray) -> list[tuple[int, int]]:
    runs = []
    i = 0
    n = ok.size
    while i < n:
        if ok[i]:
            j = i
            while j < n and ok[j]:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def _longest_true(mask: np.ndarray) -> int:
    best = cur = 0
    for m in mask:
        cur = cur + 1 if m else 0
        best = max(best, cur)
    return best


def _push_edge(c, bad: float, good: float, tol: float, iters: int = 50):
    """Bisect between a failing and a succeeding point; return the last success."""
    gd = None
    for _ in range(iters):
        mid = 0.5 * (bad + good)
        if abs(bad - good) <= 1e-10 * (1 + abs(good)):
            break
        v, _, ok = delta_values(c, [mid], tol)
        if ok[0]:
            good, gd = mid, v[0]
        else:
            bad = mid
    if gd is None:
        return None, None
    return good, gd


def _refine_extrema(c, xs, ds, tol, max_candidates: int = 16):
    """Probe local extrema of delta that stay on one side of zero.

    A pair of close zeros shows up on the grid as a dip that does not change
    sign; minimizing |delta| towards zero inside the dip exposes them.
    """
    if xs.size < 3:
        return xs, ds
    i = np.arange(1, xs.size - 1)
    s = np.sign(ds[i])
    same = (np.sign(ds[i - 1]) == s) & (np.sign(ds[i + 1]) == s) & (s != 0)
    ext = same & (s * ds[i] <= s * ds[i - 1]) & (s * ds[i] <= s * ds[i + 1])
    # only dips deep relative to their height; rounding wiggles fail this
    rise = np.maximum(np.abs(ds[i - 1] - ds[i]), np.abs(ds[i + 1] - ds[i]))
    ext &= np.abs(ds[i]) <= 4.0 * rise
    cand = i[ext]
    if cand.size > max_candidates:
        cand = cand[np.argsort(np.abs(ds[cand]))[:max_candidates]]
    extra_x, extra_d = [], []
    for k in cand:
        sg = np.sign(ds[k])

        def f(y, sg=sg):
            v, _, ok = delta_values(c, [y], tol)
            return sg * v[0] if ok[0] else math.inf

        res = minimize_scalar(f, bounds=(xs[k - 1], xs[k + 1]), method="bounded", options={"xatol": 1e-13 * (1 + abs(xs[k]))})
        if math.isfinite(res.fun) and res.x not in xs:
            extra_x.append(res.x)
            extra_d.append(sg * res.fun)
    if not extra_x:
        return xs, ds
    X = np.concatenate([xs, extra_x])
    Dv = np.concatenate([ds, extra_d])
    order = np.argsort(X)
    return X[order], Dv[order]


class _EvalFailed(Exception):
    pass


def _bracket_and_bisect(c, xs, ds, tol) -> list[float]:
    """Exact grid zeros plus one refined zero per sign change.

    Refinement is Brent's bracketing iteration (bisection safeguarded by
    secant/inverse-quadratic steps) down to a relative width of 1e-12.
    """
    zeros = [float(x) for x, v in zip(xs, ds) if v == 0]
    idx = np.flatnonzero(ds[:-1] * ds[1:] < 0)

    def f(y):
        v, _, ok = delta_values(c, [y], tol)
        if not ok[0]:
            raise _EvalFailed(y)
        return float(v[0])

    for i in idx:
        lo, hi = float(xs[i]), float(xs[i + 1])
        try:
            # run to machine precision; the 1e-12 relative width is a ceiling
            r = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
        except _EvalFailed as exc:
            log.warning("find_cycles: half-map failed at %r inside a bracket; zero skipped", exc.args[0])
            continue
        zeros.append(float(r))
    return sorted(zeros)


def _record(c, r, F, Fscale, tol) -> CycleRecord | None:
    d, yl, ok = delta_values(c, [r], tol)
    if not ok[0]:
        return None
    y1 = float(yl[0])
    fval = float(F.evalf(r, y1)) / Fscale if Fscale else 0.0
    thr = DEGENERATE_F * (1 + abs(r)) ** 4
    if fval < -thr:
        stab = "attracting"
    elif fval > thr:
        stab = "repelling"
    else:
        stab = "degenerate"
    try:
        dp = delta_prime(c, r, tol)
    except (Singularity, NoReturn, DomainViolation):
        dp = math.nan
    return CycleRecord(float(r), y1, stab, float(d[0]), fval, float(dp))
