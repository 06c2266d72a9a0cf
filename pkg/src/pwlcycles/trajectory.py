"""Independent integrators used as oracles for the closed-form half-maps.

Neither path shares code with `flow`: one is an adaptive Runge-Kutta
integration of the two-zone field, the other a matrix exponential of the
affine system lifted to three dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import brentq

from .errors import NoReturn
from .lienard import CanonicalPWL


@dataclass(frozen=True)
class ClosureCheck:
    y0: float
    y1: float  # first return to x = 0 after the left zone
    y0_return: float  # first return after the right zone
    closure_error: float
    period: float


def _crossing(rhs, start, t_max: float, direction: float, rtol: float, max_step: float):
    """First crossing of x = 0 in the given direction after leaving the line.

    A shallow excursion across the line can begin and end inside one step;
    the extrema of x are tracked as events too, so such a crossing is
    recovered from the dense output.
    """

    def hit(t, z):
        return z[0]

    def turn(t, z):
        return rhs(t, z)[0]

    hit.terminal = True
    hit.direction = direction
    turn.direction = -direction  # maxima of x for direction +1, minima for -1
    sol = solve_ivp(
        rhs, (0.0, t_max), start, method="DOP853", events=[hit, turn],
        rtol=rtol, atol=rtol * 1e-2, max_step=max_step, dense_output=True,
    )
    t_hit = sol.t_events[0][0] if sol.t_events[0].size else math.inf
    for tp, zp in zip(sol.t_events[1], sol.y_events[1]):
        if tp >= t_hit or tp <= 0.0:
            continue
        if direction * zp[0] >= 0.0:
            ts = np.linspace(max(tp - 4 * max_step, 0.0), tp, 401)
            xs = sol.sol(ts)[0] * direction
            below = np.flatnonzero(xs < 0)
            if below.size:
                t0 = ts[below[-1]]
                tc = brentq(lambda t: direction * sol.sol(t)[0], t0, tp, xtol=1e-15, rtol=1e-15)
                return float(tc), sol.sol(tc)
    if not math.isfinite(t_hit):
        raise NoReturn("orbit did not come back to x = 0 within the time horizon")
    return float(t_hit), sol.y_events[0][0]


def close_cycle(
    c: CanonicalPWL, y0: float, t_max: float = 1e3, rtol: float = 1e-12, max_step: float = 0.01
) -> ClosureCheck:
    """Follow the full two-zone flow from (0, y0) once around."""
    T_L, D_L, a_L, T_R, D_R, a_R, b = c.as_tuple()

    def left(t, z):
        return [T_L * z[0] - z[1], D_L * z[0] - a_L]

    def right(t, z):
        return [T_R * z[0] - z[1] + b, D_R * z[0] - a_R]

    # x' = -y0 < 0 at the start: the orbit enters x < 0, comes back with x increasing
    t1, z1 = _crossing(left, [0.0, y0], t_max, +1.0, rtol, max_step)
    t2, z2 = _crossing(right, [0.0, z1[1]], t_max, -1.0, rtol, max_step)
    return ClosureCheck(float(y0), float(z1[1]), float(z2[1]), abs(float(z2[1]) - y0), t1 + t2)


def backward_right_expm(c: CanonicalPWL, y0: float, t_max: float = 200.0, step: float = 0.05) -> float:
    """y_R^b(y0) by exponentiating the lifted affine field of the right zone.

    z = (x, y, 1) obeys z' = M z; the backward orbit from (0, y0) is
    expm(-t M) z0, and the first return is bracketed on a step grid that
    starts tiny and doubles up to `step`.
    """
    T, D, a, b = c.T_R, c.D_R, c.a_R, c.b
    M = np.array([[T, -1.0, b], [D, 0.0, -a], [0.0, 0.0, 0.0]])
    z0 = np.array([0.0, y0, 1.0])

    def x_at(t):
        return (expm(-t * M) @ z0)[0]

    E = expm(-step * M)
    z = z0.copy()
    t = 0.0
    prev = 0.0
    h = step * 2.0**-20  # short flights return well inside the first full step
    while t < t_max:
        if h < step:
            z = expm(-h * M) @ z
        else:
            z = E @ z
        t += h
        if not math.isfinite(z[0]) or abs(z[0]) > 1e12:
            break
        if z[0] <= 0.0 and prev > 0.0:
            tr = brentq(x_at, t - h, t, xtol=1e-15, rtol=1e-15)
            return float((expm(-tr * M) @ z0)[1])
        prev = z[0]
        h = min(2.0 * h, step)
    raise NoReturn("backward right orbit did not return")
