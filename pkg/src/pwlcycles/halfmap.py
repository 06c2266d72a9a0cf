"""Forward (left) and backward (right) Poincare half-maps on the line x = 0."""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import flow
from .errors import DomainViolation, NoReturn, Singularity
from .lienard import DEFAULT_CAP, CanonicalPWL, HalfMapIntervals, domain_interval, w_poly

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class HalfMapSample:
    y0: float
    y1: float
    flight_time: float
    residual: float


def samples_to_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(HalfMapSample)])
    for s in samples:
        w.writerow([f"{v:.17g}" for v in astuple(s)])
    return buf.getvalue()


def left_intervals(c: CanonicalPWL, cap: float = DEFAULT_CAP) -> HalfMapIntervals:
    return domain_interval(w_poly(c.T_L, c.D_L, c.a_L, "left"), cap)


def right_intervals(c: CanonicalPWL, cap: float = DEFAULT_CAP) -> HalfMapIntervals:
    """Intervals of y_R (the b = 0 backward map)."""
    return domain_interval(w_poly(c.T_R, c.D_R, c.a_R, "right"), cap)


def half_map(T: float, D: float, a: float, y0, sigma: int = 1, **horizon):
    """Vectorized half-map of  x' = T x - y, y' = D x - a.

    sigma = +1 is the forward map through x < 0, sigma = -1 the backward map
    through x > 0.  Returns arrays (y1, flight_time, residual, ok); entries
    with ok False have no return and carry NaN.
    """
    return flow.half_map_arrays(T, D, a, y0, sigma, **horizon)


def residual_ok(res, y0, y1, tol: float = DEFAULT_TOL):
    """|x| at the return, judged on the scale of the ordinates the orbit joins."""
    with np.errstate(invalid="ignore"):
        return res <= tol * (1.0 + np.abs(y0) + np.abs(y1))


def _check_domain(iv: HalfMapIntervals, y0: float, what: str):
    if not iv.domain.contains(y0):
        raise DomainViolation(f"{what}: y0 = {y0!r} outside [{iv.domain.lo}, {iv.domain.hi}]")


def _sample(T, D, a, y0, sigma, tol, what) -> HalfMapSample:
    y1, tf, res, ok = half_map(T, D, a, [y0], sigma)
    if not ok[0]:
        raise NoReturn(f"{what}: orbit through (0, {y0!r}) does not return to x = 0")
    if not residual_ok(res[0], y0, y1[0], tol):
        raise NoReturn(f"{what}: return residual {res[0]:.3g} above tolerance at y0 = {y0!r}")
    return HalfMapSample(float(y0), float(y1[0]), float(tf[0]), float(res[0]))


def eval_yL(c: CanonicalPWL, y0: float, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP) -> HalfMapSample:
    _check_domain(left_intervals(c, cap), y0, "y_L")
    return _sample(c.T_L, c.D_L, c.a_L, y0, +1, tol, "y_L")


def eval_yR(c: CanonicalPWL, y0: float, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP) -> HalfMapSample:
    _check_domain(right_intervals(c, cap), y0, "y_R")
    return _sample(c.T_R, c.D_R, c.a_R, y0, -1, tol, "y_R")


def eval_yRb(c: CanonicalPWL, y0: float, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP) -> HalfMapSample:
    """y_R^b(y0) = y_R(y0 - b) + b."""
    if not right_intervals(c, cap).domain.contains(y0 - c.b):
        raise DomainViolation(f"y_R^b: y0 - b = {y0 - c.b!r} outside the domain of y_R")
    s = eval_yR(c, y0 - c.b, tol, cap)
    return HalfMapSample(float(y0), s.y1 + c.b, s.flight_time, s.residual)


def _ode_slope(W, y0, y1):
    w0 = W(y0)
    if y1 == 0 or w0 == 0:
        raise Singularity(f"half-map slope undefined at (y0, y1) = ({y0!r}, {y1!r})")
    return y0 * W(y1) / (y1 * w0)


def deriv_yL(c: CanonicalPWL, y0: float, y1: float) -> float:
    """dy1/dy0 of the forward map from its differential equation."""
    return _ode_slope(w_poly(c.T_L, c.D_L, c.a_L), y0, y1)


def deriv_yR(c: CanonicalPWL, y0: float, y1: float) -> float:
    """Slope of the b = 0 backward map at (y0, y1 = y_R(y0))."""
    return _ode_slope(w_poly(c.T_R, c.D_R, c.a_R), y0, y1)


def slope_field(W, y0, y1):
    """Vectorized y0 W(y1) / (y1 W(y0)) (NaN where undefined)."""
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return y0 * W(y1) / (y1 * W(y0))
