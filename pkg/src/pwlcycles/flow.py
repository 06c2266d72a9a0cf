"""Closed-form flow of  x' = T x - y,  y' = D x - a  started on the line x = 0.

With h the solution of  h'' - T h' + D h = 0,  h(0) = 0,  h'(0) = 1  and
H(t) = int_0^t h, the orbit through (0, y0) is

    x(t) = a H(t) - y0 h(t)
    y(t) = (h'(t) - T h(t)) y0 - a (h(t) - T H(t))

for every real t, so forward and backward flows share one evaluator.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


def _psi_double(u):
    """int_0^1 v exp(u v) dv, stable at u = 0."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 0.1
    out = np.empty_like(u)
    us = u[small]
    acc = np.zeros_like(us)
    term = np.ones_like(us)
    for k in range(16):
        acc += term / (k + 2)
        term = term * us / (k + 1)
    out[small] = acc
    ub = u[~small]
    with np.errstate(over="ignore", invalid="ignore"):
        out[~small] = (np.exp(ub) * (ub - 1.0) + 1.0) / (ub * ub)
    return out


def _phi1(lam: float, t):
    """expm1(lam t) / lam, equal to t at lam = 0."""
    if lam == 0:
        return np.asarray(t, dtype=float).copy()
    return np.expm1(lam * t) / lam


SERIES_REACH = 0.5  # Taylor kernels are used while (|T| + sqrt|D|) |t| stays below this
SERIES_TERMS = 24


def _series_coeffs(T: float, D: float) -> list[float]:
    """c_k with h = sum c_k t^k, from h'' = T h' - D h, h(0) = 0, h'(0) = 1."""
    c = [0.0, 1.0]
    for k in range(SERIES_TERMS - 2):
        c.append((T * (k + 1) * c[k + 1] - D * c[k]) / ((k + 2) * (k + 1)))
    return c


def _series_kernels(T: float, D: float, t):
    """(h, h', H) from the Taylor series of h.

    The closed forms subtract quantities of size one to get x ~ t^2 at short
    times; the series keeps full relative accuracy there.
    """
    t = np.asarray(t, dtype=float)
    c = _series_coeffs(T, D)
    h = np.zeros_like(t)
    hp = np.zeros_like(t)
    H = np.zeros_like(t)
    for k in range(SERIES_TERMS - 1, 0, -1):  # Horner, highest power first
        h = h * t + c[k]
        hp = hp * t + k * c[k]
        H = H * t + c[k] / (k + 1)
    return h * t, hp, H * t * t


def kernels(T: float, D: float, t):
    """Return (h, h', H) at the times t for the pair (T, D)."""
    t = np.asarray(t, dtype=float)
    disc = T * T - 4.0 * D
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        if disc < 0:
            al = 0.5 * T
            om = 0.5 * math.sqrt(-disc)
            e = np.exp(al * t)
            s = np.sin(om * t)
            c = np.cos(om * t)
            h = e * s / om
            hp = e * (c + al * s / om)
            H = (1.0 + T * h - hp) / D
        elif disc > 0:
            dl = math.sqrt(disc)
            if T >= 0:
                l1 = 0.5 * (T + dl)
                l2 = D / l1 if l1 != 0 else 0.5 * (T - dl)
            else:
                l2 = 0.5 * (T - dl)
                l1 = D / l2
            e1 = np.exp(l1 * t)
            e2 = np.exp(l2 * t)
            near = np.abs(dl * t) < 0.5
            h = np.where(near, e2 * np.expm1(dl * t) / dl, (e1 - e2) / dl)
            hp = l2 * h + e1
            if dl * dl >= abs(D):
                H = (_phi1(l1, t) - _phi1(l2, t)) / dl
            else:
                H = (1.0 + T * h - hp) / D
        else:
            lam = 0.5 * T
            e = np.exp(lam * t)
            h = t * e
            hp = e * (1.0 + lam * t)
            H = t * t * _psi_double(lam * t)
    short = (abs(T) + math.sqrt(abs(D))) * np.abs(t) < SERIES_REACH
    if np.any(short):
        hs, hps, Hs = _series_kernels(T, D, t)
        h, hp, H = np.where(short, hs, h), np.where(short, hps, hp), np.where(short, Hs, H)
    return h, hp, H


def _eigen_pair(T: float, D: float):
    """Real eigenvalues l1 > l2 of s^2 - T s + D, or None when a mode form is ill-posed."""
    disc = T * T - 4.0 * D
    if disc <= 0 or D == 0:
        return None
    dl = math.sqrt(disc)
    if T >= 0:
        l1 = 0.5 * (T + dl)
        l2 = D / l1
    else:
        l2 = 0.5 * (T - dl)
        l1 = D / l2
    big = max(abs(l1), abs(l2))
    if min(abs(l1), abs(l2)) < 1e-6 * big or dl < 1e-6 * big:
        return None
    return l1, l2, dl


def orbit(T: float, D: float, a: float, y0, t):
    """(x, dx/dt, y) at time t on the orbit through (0, y0).

    Real distinct spectra use the eigenmode expansion, whose coefficients
    a/l - y0 are formed before exponentiation; near a saddle's stable
    manifold that coefficient is tiny and must not come out of a difference
    of two exponentially large terms.
    """
    pair = _eigen_pair(T, D)
    if pair is not None and np.all((abs(T) + math.sqrt(abs(D))) * np.abs(t) < SERIES_REACH):
        pair = None
    if pair is None:
        h, hp, H = kernels(T, D, t)
        x = a * H - y0 * h
        dx = a * h - y0 * hp
        y = (hp - T * h) * y0 - a * (h - T * H)
        return x, dx, y
    l1, l2, dl = pair
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        e1 = np.exp(l1 * t)
        e2 = np.exp(l2 * t)
        c1 = (a / l1 - y0) / dl
        c2 = (a / l2 - y0) / dl
        x = c1 * e1 - c2 * e2 + a / D
        dx = c1 * l1 * e1 - c2 * l2 * e2
        y = c1 * l2 * e1 - c2 * l1 * e2 + a * T / D
    return x, dx, y


def position(T: float, D: float, a: float, y0, t):
    """(x(t), y(t)) on the orbit through (0, y0)."""
    x, _, y = orbit(T, D, a, y0, t)
    return x, y


def velocity_x(T: float, D: float, a: float, y0, t):
    """dx/dt along the orbit through (0, y0)."""
    return orbit(T, D, a, y0, t)[1]


# ---------------------------------------------------------------- return times

def base_step(T: float, D: float) -> float:
    """Marching step: at most one critical point of x(t) per step."""
    disc = abs(4.0 * D - T * T)
    h = min(1.0, 2.0 * math.pi / math.sqrt(max(disc, 1.0)))
    return 0.5 * h


def return_times(
    T: float,
    D: float,
    a: float,
    y0,
    sigma: int = 1,
    max_steps: int = 1000,
    space_horizon: float = 1e15,
):
    """First s > 0 at which the orbit through (0, y0) meets x = 0 again.

    sigma = +1 follows the flow forward through x < 0; sigma = -1 follows it
    backward through x > 0.  Works on arrays of y0 and returns (s, ok) where
    ok is False for orbits without a return before the horizon.  y0 = 0 is
    left to the caller.
    """
    y0 = np.ascontiguousarray(np.atleast_1d(np.asarray(y0, dtype=float)))
    return _return_times(float(T), float(D), float(a), y0, int(sigma), int(max_steps), float(space_horizon))


# ---------------------------------------------------------------- compiled scalar path
#
# The march below runs once per ordinate; in numpy its per-step overhead
# dominated every search, so it is compiled.  The formulas mirror
# `kernels` and `orbit` above, which stay as the vectorized reference.


@njit(cache=True)
def _psi_s(u):
    if abs(u) < 0.1:
        acc = 0.0
        term = 1.0
        for k in range(16):
            acc += term / (k + 2)
            term = term * u / (k + 1)
        return acc
    return (math.exp(u) * (u - 1.0) + 1.0) / (u * u)


@njit(cache=True)
def _phi1_s(lam, t):
    if lam == 0.0:
        return t
    return math.expm1(lam * t) / lam


@njit(cache=True)
def _series_s(T, D, t):
    c_km1 = 0.0  # c_0
    c_k = 1.0  # c_1
    coeffs = np.empty(SERIES_TERMS)
    coeffs[0] = c_km1
    coeffs[1] = c_k
    for k in range(SERIES_TERMS - 2):
        coeffs[k + 2] = (T * (k + 1) * coeffs[k + 1] - D * coeffs[k]) / ((k + 2) * (k + 1))
    h = 0.0
    hp = 0.0
    H = 0.0
    for k in range(SERIES_TERMS - 1, 0, -1):
        h = h * t + coeffs[k]
        hp = hp * t + k * coeffs[k]
        H = H * t + coeffs[k] / (k + 1)
    return h * t, hp, H * t * t


@njit(cache=True)
def _orbit_s(T, D, a, y0, t):
    """Scalar (x, dx/dt, y) on the orbit through (0, y0)."""
    disc = T * T - 4.0 * D
    if (abs(T) + math.sqrt(abs(D))) * abs(t) < SERIES_REACH:
        h, hp, H = _series_s(T, D, t)
        x = a * H - y0 * h
        dx = a * h - y0 * hp
        y = (hp - T * h) * y0 - a * (h - T * H)
        return x, dx, y
    if disc > 0.0 and D != 0.0:
        dl = math.sqrt(disc)
        if T >= 0.0:
            l1 = 0.5 * (T + dl)
            l2 = D / l1
        else:
            l2 = 0.5 * (T - dl)
            l1 = D / l2
        big = max(abs(l1), abs(l2))
        if min(abs(l1), abs(l2)) >= 1e-6 * big and dl >= 1e-6 * big:
            e1 = math.exp(l1 * t)
            e2 = math.exp(l2 * t)
            c1 = (a / l1 - y0) / dl
            c2 = (a / l2 - y0) / dl
            x = c1 * e1 - c2 * e2 + a / D
            dx = c1 * l1 * e1 - c2 * l2 * e2
            y = c1 * l2 * e1 - c2 * l1 * e2 + a * T / D
            return x, dx, y
    if disc < 0.0:
        al = 0.5 * T
        om = 0.5 * math.sqrt(-disc)
        e = math.exp(al * t)
        sn = math.sin(om * t)
        cs = math.cos(om * t)
        h = e * sn / om
        hp = e * (cs + al * sn / om)
        H = (1.0 + T * h - hp) / D
    elif disc > 0.0:
        dl = math.sqrt(disc)
        if T >= 0.0:
            l1 = 0.5 * (T + dl)
            l2 = D / l1 if l1 != 0.0 else 0.5 * (T - dl)
        else:
            l2 = 0.5 * (T - dl)
            l1 = D / l2
        e1 = math.exp(l1 * t)
        e2 = math.exp(l2 * t)
        if abs(dl * t) < 0.5:
            h = e2 * math.expm1(dl * t) / dl
        else:
            h = (e1 - e2) / dl
        hp = l2 * h + e1
        if dl * dl >= abs(D):
            H = (_phi1_s(l1, t) - _phi1_s(l2, t)) / dl
        else:
            H = (1.0 + T * h - hp) / D
    else:
        lam = 0.5 * T
        e = math.exp(lam * t)
        h = t * e
        hp = e * (1.0 + lam * t)
        H = t * t * _psi_s(lam * t)
    x = a * H - y0 * h
    dx = a * h - y0 * hp
    y = (hp - T * h) * y0 - a * (h - T * H)
    return x, dx, y


@njit(cache=True)
def _xi_s(T, D, a, y0, sigma, s):
    """(xi, dxi/ds) with xi(s) = sigma x(sigma s)."""
    x, dx, _ = _orbit_s(T, D, a, y0, sigma * s)
    return sigma * x, dx


@njit(cache=True)
def _newton_bracket(T, D, a, y0, sigma, lo, hi, which):
    """Safeguarded Newton for f(lo) < 0 <= f(hi).

    which = 0 solves xi = 0, which = 1 solves -dxi/ds = 0 (a maximum of xi).
    Steps leaving the bracket fall back to bisection.
    """
    s = 0.5 * (lo + hi)
    for _ in range(100):
        x, dx, _y = _orbit_s(T, D, a, y0, sigma * s)
        if which == 0:
            f = sigma * x
            df = dx
        else:
            f = -dx
            df = -sigma * (T * dx - D * x + a)  # x'' = T x' - y'
        if f == 0.0:
            return s
        if f < 0.0:
            lo = s
        else:
            hi = s
        cand = s - f / df if df != 0.0 else math.nan
        if math.isfinite(cand) and lo < cand < hi:
            nxt = cand
        else:
            nxt = 0.5 * (lo + hi)
        tiny = 4e-16 * (1.0 + abs(s))
        if abs(nxt - s) <= tiny or hi - lo <= tiny:
            return nxt
        s = nxt
    return s


@njit(cache=True)
def _return_time_s(T, D, a, y0, sigma, max_steps, space_horizon):
    hs = 0.5 * min(1.0, 2.0 * math.pi / math.sqrt(max(abs(4.0 * D - T * T), 1.0)))
    disc = T * T - 4.0 * D
    real_spec = disc >= 0.0
    decaying = disc < 0.0 and sigma * T <= 0.0
    period = 2.0 * math.pi / (0.5 * math.sqrt(-disc)) if disc < 0.0 else math.inf
    lim = space_horizon * (1.0 + abs(y0))
    s_prev = 0.0
    d_prev = -y0
    seen_rise = False
    for k in range(1, max_steps + 1):
        # x(t) has at most one critical point for real spectra, so the
        # march can stretch geometrically after the first few steps
        if real_spec and k > 16:
            s = 16.0 * hs * 1.25 ** (k - 16)
        else:
            s = k * hs
        xb, db = _xi_s(T, D, a, y0, sigma, s)
        if not math.isfinite(xb) or abs(xb) > lim:
            return math.nan, False
        if xb >= 0.0:
            return _newton_bracket(T, D, a, y0, sigma, s_prev, s, 0), True
        if d_prev > 0.0 and db < 0.0:
            sm = _newton_bracket(T, D, a, y0, sigma, s_prev, s, 1)
            xm, _ = _xi_s(T, D, a, y0, sigma, sm)
            if xm >= 0.0:
                return _newton_bracket(T, D, a, y0, sigma, s_prev, sm, 0), True
        if real_spec:
            if d_prev > 0.0:
                seen_rise = True
            # past its only critical point x is monotone: a falling orbit is gone
            if seen_rise and db < 0.0:
                return math.nan, False
        if decaying and s > period + 2.0 * hs:
            return math.nan, False
        s_prev = s
        d_prev = db
    return math.nan, False


@njit(cache=True)
def _return_times(T, D, a, y0, sigma, max_steps, space_horizon):
    n = y0.size
    s = np.full(n, np.nan)
    ok = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        si, oki = _return_time_s(T, D, a, y0[i], float(sigma), max_steps, space_horizon)
        s[i] = si
        ok[i] = oki
    return s, ok


@njit(cache=True)
def _half_map_s(T, D, a, y0, sigma, max_steps, space_horizon):
    """(y1, flight time, |x| at return, ok) for an array of ordinates."""
    n = y0.size
    y1 = np.full(n, np.nan)
    tf = np.full(n, np.nan)
    res = np.full(n, np.nan)
    ok = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if y0[i] == 0.0:
            y1[i] = 0.0
            tf[i] = 0.0
            res[i] = 0.0
            ok[i] = True
            continue
        s, found = _return_time_s(T, D, a, y0[i], sigma, max_steps, space_horizon)
        if found:
            x, _dx, y = _orbit_s(T, D, a, y0[i], sigma * s)
            y1[i] = y
            tf[i] = s
            res[i] = abs(x)
            ok[i] = True
    return y1, tf, res, ok


def half_map_arrays(T: float, D: float, a: float, y0, sigma: int = 1, max_steps: int = 1000, space_horizon: float = 1e15):
    y0 = np.ascontiguousarray(np.atleast_1d(np.asarray(y0, dtype=float)))
    return _half_map_s(float(T), float(D), float(a), y0, float(sigma), int(max_steps), float(space_horizon))
