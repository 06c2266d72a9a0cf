"""Diagnostic plots written directly as SVG text.

Every plot uses the same fixed viewBox; coordinates are printed with two
decimals so the output is byte-stable for identical inputs.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .contact import RegionSpec, derive_F, derive_G, excluded_point, solve_system, transform_phi
from .displacement import CycleSearch, delta_values, find_cycles, image_interval, interval_I_b
from .errors import DegenerateSystem, NotApplicable, PWLError
from .halfmap import DEFAULT_TOL, half_map, left_intervals
from .lienard import DEFAULT_CAP, CanonicalPWL

WIDTH, HEIGHT, MARGIN = 640, 480, 56
COLORS = {"yL": "#1f5fbf", "yR": "#c0392b", "curve": "#1e8449", "G": "#8e44ad", "mark": "#111111"}


class Canvas:
    """Maps data coordinates into the plotting box and collects SVG elements."""

    def __init__(self, xlim, ylim, title: str, xlabel: str, ylabel: str):
        x0, x1 = map(float, xlim)
        y0, y1 = map(float, ylim)
        if not x1 > x0:
            x0, x1 = x0 - 1.0, x0 + 1.0
        if not y1 > y0:
            y0, y1 = y0 - 1.0, y0 + 1.0
        self.xlim, self.ylim = (x0, x1), (y0, y1)
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.items: list[str] = []

    def px(self, x, y):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        u = MARGIN + (np.asarray(x, dtype=float) - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)
        v = HEIGHT - MARGIN - (np.asarray(y, dtype=float) - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)
        return u, v

    def inside(self, x, y):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.isfinite(x) & np.isfinite(y) & (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)

    def polyline(self, x, y, color: str, width: float = 1.5, cls: str = "curve", dash: str | None = None):
        """Draw the finite in-box stretches of (x, y) as separate polylines."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = self.inside(x, y)
        u, v = self.px(x, y)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        start = None
        for i in range(len(x) + 1):
            if i < len(x) and keep[i]:
                if start is None:
                    start = i
                continue
            if start is not None and i - start >= 2:
                pts = " ".join(f"{u[j]:.2f},{v[j]:.2f}" for j in range(start, i))
                self.items.append(
                    f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'
                )
            start = None

    def segments(self, segs, color: str, width: float = 1.5, cls: str = "contour"):
        if not segs:
            return
        parts = []
        for (xa, ya), (xb, yb) in segs:
            (ua, ub), (va, vb) = self.px([xa, xb], [ya, yb])
            parts.append(f"M{ua:.2f} {va:.2f}L{ub:.2f} {vb:.2f}")
        self.items.append(f'<path class="{cls}" d="{"".join(parts)}" fill="none" stroke="{color}" stroke-width="{width}"/>')

    def marker(self, x: float, y: float, cls: str, color: str = COLORS["mark"], shape: str = "circle"):
        if not self.inside(x, y):
            return
        u, v = self.px(x, y)
        if shape == "circle":
            self.items.append(f'<circle class="{cls}" cx="{u:.2f}" cy="{v:.2f}" r="4" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            self.items.append(
                f'<rect class="{cls}" x="{u - 4:.2f}" y="{v - 4:.2f}" width="8" height="8" fill="{color}"/>'
            )

    def shade_runs(self, mask: np.ndarray, xs: np.ndarray, ys: np.ndarray, color: str, cls: str = "region"):
        """Fill the cells where mask[i, j] holds (rows follow ys, columns xs)."""
        dx = (xs[1] - xs[0]) / 2 if xs.size > 1 else 0.5
        dy = (ys[1] - ys[0]) / 2 if ys.size > 1 else 0.5
        for i, yv in enumerate(ys):
            row = mask[i]
            j = 0
            while j < row.size:
                if not row[j]:
                    j += 1
                    continue
                k = j
                while k + 1 < row.size and row[k + 1]:
                    k += 1
                (ua, ub), (va, vb) = self.px([xs[j] - dx, xs[k] + dx], [yv + dy, yv - dy])
                self.items.append(
                    f'<rect class="{cls}" x="{ua:.2f}" y="{va:.2f}" width="{ub - ua:.2f}" height="{vb - va:.2f}" '
                    f'fill="{color}" stroke="none"/>'
                )
                j = k + 1

    def legend(self, entries):
        for n, (label, color) in enumerate(entries):
            y = MARGIN + 14 + 16 * n
            self.items.append(
                f'<line x1="{WIDTH - 190}" y1="{y - 4}" x2="{WIDTH - 170}" y2="{y - 4}" stroke="{color}" stroke-width="2"/>'
                f'<text x="{WIDTH - 164}" y="{y}" font-size="11">{escape(label)}</text>'
            )

    def _axes(self) -> list[str]:
        out = [
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" '
            'fill="none" stroke="#444" stroke-width="1"/>'
        ]
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        for t in np.linspace(x0, x1, 5):
            u, _ = self.px(t, y0)
            out.append(f'<text x="{u:.2f}" y="{HEIGHT - MARGIN + 16}" font-size="10" text-anchor="middle">{t:.3g}</text>')
        for t in np.linspace(y0, y1, 5):
            _, v = self.px(x0, t)
            out.append(f'<text x="{MARGIN - 6}" y="{v + 3:.2f}" font-size="10" text-anchor="end">{t:.3g}</text>')
        if x0 < 0 < x1:
            self._zero_line(out, [0, 0], [y0, y1])
        if y0 < 0 < y1:
            self._zero_line(out, [x0, x1], [0, 0])
        out.append(f'<text x="{WIDTH / 2}" y="{MARGIN - 20}" font-size="14" text-anchor="middle">{escape(self.title)}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 14}" font-size="12" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(
            f'<text x="16" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 16 {HEIGHT / 2})">{escape(self.ylabel)}</text>'
        )
        return out

    def _zero_line(self, out, xs, ys):
        (ua, ub), (va, vb) = self.px(xs, ys)
        out.append(f'<line x1="{ua:.2f}" y1="{va:.2f}" x2="{ub:.2f}" y2="{vb:.2f}" stroke="#bbb" stroke-width="0.8"/>')

    def to_svg(self) -> str:
        body = "\n".join(self._axes() + self.items)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n{body}\n</svg>\n'
        )


def contour_segments(f, xlim, ylim, nx: int = 160, ny: int = 160):
    """Marching-squares segments of the zero set of a vectorized f(x, y)."""
    xs = np.linspace(*xlim, nx)
    ys = np.linspace(*ylim, ny)
    X, Y = np.meshgrid(xs, ys)
    Z = np.asarray(f(X, Y), dtype=float)
    segs = []

    def cut(p, q, fp, fq):
        t = fp / (fp - fq)
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))

    for i in range(ny - 1):
        for j in range(nx - 1):
            corners = [(xs[j], ys[i]), (xs[j + 1], ys[i]), (xs[j + 1], ys[i + 1]), (xs[j], ys[i + 1])]
            vals = [Z[i, j], Z[i, j + 1], Z[i + 1, j + 1], Z[i + 1, j]]
            if not all(math.isfinite(v) for v in vals):
                continue
            pts = []
            for e in range(4):
                a, b = e, (e + 1) % 4
                if (vals[a] > 0) != (vals[b] > 0):
                    pts.append(cut(corners[a], corners[b], vals[a], vals[b]))
            # two or four crossings; pair them in edge order
            for k in range(0, len(pts) - 1, 2):
                segs.append((pts[k], pts[k + 1]))
    return segs


def _view_hi(c: CanonicalPWL, hi: float, cycles) -> float:
    scale = max([1.0, abs(c.b), abs(c.a_L), abs(c.a_R)] + [1.3 * r.y0_star for r in cycles])
    return min(hi, 4.0 * scale)


def plot_halfmaps(c: CanonicalPWL, search: CycleSearch | None = None, cap: float = DEFAULT_CAP, n: int = 400) -> str:
    """y_L and y_R^b in the fourth quadrant, with the curve F_b = 0 on top."""
    cycles = search.cycles if search is not None else []
    dom = left_intervals(c, cap).domain
    I_b = interval_I_b(c, cap)
    hi = _view_hi(c, max(dom.hi, I_b.hi), cycles)
    ys = np.linspace(0.0, hi, n + 1)[1:]
    yl, _, _, okl = half_map(c.T_L, c.D_L, c.a_L, ys, +1)
    yr, _, _, okr = half_map(c.T_R, c.D_R, c.a_R, ys - c.b, -1)
    yr = yr + c.b
    okl &= np.array([dom.interior_contains(v) for v in ys])
    okr &= np.array([I_b.interior_contains(v) for v in ys]) if not I_b.degenerate else False
    lows = np.concatenate([yl[okl], yr[okr], [-1.0]])
    lo = float(np.min(lows[np.isfinite(lows)])) * 1.05
    cv = Canvas((0.0, hi), (lo, 0.0), "half-maps", "y0", "y1")
    cv.polyline(ys, np.where(okl, yl, np.nan), COLORS["yL"], cls="yL")
    cv.polyline(ys, np.where(okr, yr, np.nan), COLORS["yR"], cls="yRb")
    F = derive_F(c)
    if not F.is_zero():
        cv.segments(contour_segments(F.evalf, (0.0, hi), (lo, 0.0)), COLORS["curve"], 1.0, "gamma")
    for r in cycles:
        cv.marker(r.y0_star, r.y1_star, "cycle")
    cv.legend([("y_L(y0)", COLORS["yL"]), ("y_R^b(y0)", COLORS["yR"]), ("F_b = 0", COLORS["curve"])])
    return cv.to_svg()


def plot_delta(c: CanonicalPWL, search: CycleSearch, tol: float = DEFAULT_TOL, cap: float = DEFAULT_CAP, n: int = 600) -> str:
    """asinh(delta_b) against asinh(y0) over int(I_b), cycle zeros circled.

    Both axes are compressed so zeros that differ by orders of magnitude
    remain distinguishable.
    """
    if search.continuum:
        raise NotApplicable("delta vanishes on an interval; nothing to plot")
    I_b = interval_I_b(c, cap)
    if I_b.degenerate:
        raise NotApplicable("I_b has empty interior")
    hi = _view_hi(c, I_b.hi, search.cycles + search.boundary_suspects)
    u = np.linspace(math.asinh(I_b.lo), math.asinh(hi), n + 2)[1:-1]
    ys = np.sinh(u)
    d, _, ok = delta_values(c, ys, tol)
    z = np.where(ok, np.arcsinh(d), np.nan)
    fin = z[np.isfinite(z)]
    top = float(np.max(np.abs(fin))) * 1.05 if fin.size else 1.0
    cv = Canvas((u[0], u[-1]), (-top, top), "displacement", "asinh(y0)", "asinh(delta_b)")
    cv.polyline(u, z, COLORS["yL"], cls="delta")
    for r in search.cycles:
        cv.marker(math.asinh(r.y0_star), 0.0, "zero")
    for r in search.boundary_suspects:
        cv.marker(math.asinh(r.y0_star), 0.0, "boundary-suspect", shape="square")
    return cv.to_svg()


def plot_contact(c: CanonicalPWL, cap: float = DEFAULT_CAP, n: int = 120) -> str:
    """The (Y0, Y1) plane: shaded phi(U), the conic, the cubic and the excluded point."""
    F = derive_F(c)
    if F.is_zero():
        raise NotApplicable("F_b vanishes identically")
    G = derive_G(F, c)
    Ft, Gt = transform_phi(F), transform_phi(G)
    region = RegionSpec.build(c.T_L, interval_I_b(c, cap), image_interval(c, cap))
    pts = []
    ex = None
    if c.D_L != 0:
        ex = excluded_point(c, region, Ft, Gt)
        pts.append((float(ex.Y0), float(ex.Y1)))
    sols = []
    try:
        sols = solve_system(Ft, Gt, region).solutions
    except (DegenerateSystem, PWLError):
        pass
    pts += [(s.Y0, s.Y1) for s in sols]
    finite = [p for p in pts if all(math.isfinite(v) for v in p)]
    s0 = max([2.0] + [1.3 * abs(p[0]) for p in finite])
    s1 = max([2.0] + [1.3 * abs(p[1]) for p in finite])
    xlim, ylim = (-min(s0, 1e6), min(s0, 1e6)), (-min(s1, 1e12), min(s1, 1e12))
    cv = Canvas(xlim, ylim, "contact system", "Y0 = y0 + y1", "Y1 = y0 y1")
    xs = np.linspace(*xlim, n)
    yv = np.linspace(*ylim, n)
    mask = np.array([[region.contains_Y(float(a), float(b)) for a in xs] for b in yv])
    cv.shade_runs(mask, xs, yv, "#d6eaf8")
    cv.segments(contour_segments(Ft.evalf, xlim, ylim), COLORS["curve"], 1.5, "conic")
    cv.segments(contour_segments(Gt.evalf, xlim, ylim), COLORS["G"], 1.0, "cubic")
    for s in sols:
        cv.marker(s.Y0, s.Y1, "contact")
    if ex is not None:
        cv.marker(float(ex.Y0), float(ex.Y1), "excluded", COLORS["yR"], shape="square")
    cv.legend([("F~_b = 0", COLORS["curve"]), ("G~_b = 0", COLORS["G"]), ("excluded point", COLORS["yR"])])
    return cv.to_svg()


def plot(c: CanonicalPWL, what: str, tol: float = DEFAULT_TOL, grid_n: int = 512, cap: float = DEFAULT_CAP,
         search: CycleSearch | None = None) -> str:
    if what == "contact":
        return plot_contact(c, cap)
    if search is None:
        search = find_cycles(c, grid_n, tol, cap)
    if what == "halfmaps":
        # the half-maps do not depend on delta, so a continuum still plots here
        return plot_halfmaps(c, search, cap)
    if what == "delta":
        return plot_delta(c, search, tol, cap)
    raise ValueError(f"unknown plot {what!r}; choose halfmaps, delta or contact")
