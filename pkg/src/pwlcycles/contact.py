"""Contact polynomials F_b, G_b and the transformed contact system.

F_b is the cofactor of (y0 - y1) in the numerator of the displacement
derivative at a zero; G_b = <grad F_b, X_L> locates the contact points of
the vector field X_L(y0, y1) = -(y1 W_L(y0), y0 W_L(y1)) with {F_b = 0}.
Everything here is exact rational arithmetic except the final float
refinement of already-isolated roots.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import DegenerateSystem, DerivationMismatch, NotApplicable, NotSymmetric
from .lienard import CanonicalPWL, DomainInterval, w_poly
from .poly import (
    BivarPoly,
    Y0,
    Y1,
    binary_form_resultant,
    homogeneous_part,
    isolate_real_roots,
    resultant,
    trim,
)

log = logging.getLogger(__name__)

F_MONOMIALS = frozenset({(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2)})
G_MONOMIALS = frozenset(
    {(i, j) for i in range(4) for j in range(4)} - {(0, 0)}
)


def w_bivar(T, D, a, which: int, shift=0) -> BivarPoly:
    """W(v - shift) = D (v-s)^2 - a T (v-s) + a^2 in variable `which` (exact)."""
    T, D, a, shift = (Fraction(v) for v in (T, D, a, shift))
    v = BivarPoly.var(which) - shift
    return v * v * D + v * (-a * T) + a * a


def _exact(c: CanonicalPWL):
    e = c.exact()
    return e["T_L"], e["D_L"], e["a_L"], e["T_R"], e["D_R"], e["a_R"], e["b"]


def displacement_numerator(c: CanonicalPWL) -> BivarPoly:
    """(y0-b) W_R(y1-b) y1 W_L(y0) - y0 W_L(y1) (y1-b) W_R(y0-b)."""
    TL, DL, aL, TR, DR, aR, b = _exact(c)
    WL0 = w_bivar(TL, DL, aL, 0)
    WL1 = w_bivar(TL, DL, aL, 1)
    WR0b = w_bivar(TR, DR, aR, 0, b)
    WR1b = w_bivar(TR, DR, aR, 1, b)
    return (Y0 - b) * WR1b * Y1 * WL0 - Y0 * WL1 * (Y1 - b) * WR0b


def derive_F(c: CanonicalPWL) -> BivarPoly:
    N = displacement_numerator(c)
    F, rem = N.divmod(Y0 - Y1)
    if not rem.is_zero():
        raise DerivationMismatch(f"(y0 - y1) does not divide the numerator: remainder {rem}")
    if not F.is_symmetric():
        raise DerivationMismatch("quotient F_b is not symmetric")
    extra = set(F.coeffs) - F_MONOMIALS
    if extra:
        raise DerivationMismatch(f"F_b has monomials outside its template: {sorted(extra)}")
    return F


def x_left(c: CanonicalPWL) -> tuple[BivarPoly, BivarPoly]:
    TL, DL, aL, *_ = _exact(c)
    return -(Y1 * w_bivar(TL, DL, aL, 0)), -(Y0 * w_bivar(TL, DL, aL, 1))


def derive_G(F: BivarPoly, c: CanonicalPWL) -> BivarPoly:
    X0, X1 = x_left(c)
    G = F.diff(0) * X0 + F.diff(1) * X1
    if not G.is_symmetric():
        raise DerivationMismatch("G_b is not symmetric")
    extra = set(G.coeffs) - G_MONOMIALS
    if extra:
        raise DerivationMismatch(f"G_b has monomials outside its template: {sorted(extra)}")
    return G


def m_coefficients(F: BivarPoly) -> list[Fraction]:
    """m_0..m_5 of the symmetric quartic template."""
    return [F[(0, 0)], F[(1, 0)], F[(1, 1)], F[(2, 0)], F[(2, 1)], F[(2, 2)]]


def n_coefficients(G: BivarPoly) -> list[Fraction]:
    """n_1..n_9 of the symmetric sextic template."""
    return [G[(1, 0)], G[(1, 1)], G[(2, 0)], G[(2, 1)], G[(3, 0)], G[(2, 2)], G[(3, 1)], G[(3, 2)], G[(3, 3)]]


def transform_phi(p: BivarPoly) -> BivarPoly:
    """Rewrite a symmetric p(y0, y1) as P(Y0, Y1) with Y0 = y0 + y1, Y1 = y0 y1."""
    if not p.is_symmetric():
        raise NotSymmetric("transform_phi needs a swap-invariant polynomial")
    e1 = Y0 + Y1
    e2 = Y0 * Y1
    rest = p
    out: dict[tuple[int, int], Fraction] = {}
    while not rest.is_zero():
        (i, j), v = max(rest.coeffs.items())
        if i < j:
            raise NotSymmetric("leading monomial not dominant; input is not symmetric")
        out[(i - j, j)] = out.get((i - j, j), 0) + v
        rest = rest - (e1 ** (i - j)) * (e2**j) * v
    return BivarPoly(out)


def pullback(P: BivarPoly) -> BivarPoly:
    """P(y0 + y1, y0 y1) as a polynomial in (y0, y1)."""
    return P.compose(Y0 + Y1, Y0 * Y1)


# ---------------------------------------------------------------- region


def _sgn(v) -> int:
    return int(v > 0) - int(v < 0)


@dataclass(frozen=True)
class RegionSpec:
    """U = B ∩ int(I_b x image) and its image under (y0, y1) -> (y0 + y1, y0 y1)."""

    T_L_sign: Literal["neg", "zero", "pos"]
    I_b: DomainInterval
    image_interval: DomainInterval

    @classmethod
    def build(cls, T_L: float, I_b: DomainInterval, image: DomainInterval) -> "RegionSpec":
        sign = {-1: "neg", 0: "zero", 1: "pos"}[_sgn(T_L)]
        return cls(sign, I_b, image)

    @property
    def y0_sign(self) -> int:
        """Required sign of Y0 = y0 + y1 inside phi(U): -sign(T_L)."""
        return {"neg": 1, "zero": 0, "pos": -1}[self.T_L_sign]

    def contains_y(self, y0: float, y1: float) -> bool:
        if not (y0 > 0 and y1 < 0):
            return False
        s = self.y0_sign
        if s == 0 or _sgn(y0 + y1) != s:
            return False
        return self.I_b.interior_contains(y0) and self.image_interval.interior_contains(y1)

    def contains_Y(self, Y0v: float, Y1v: float) -> bool:
        if not Y1v < 0:
            return False
        r = math.sqrt(Y0v * Y0v - 4.0 * Y1v)
        # stable split of the two roots of z^2 - Y0 z + Y1
        if Y0v >= 0:
            y0 = 0.5 * (Y0v + r)
            y1 = Y1v / y0
        else:
            y1 = 0.5 * (Y0v - r)
            y0 = Y1v / y1
        return self.contains_y(y0, y1)

    def to_dict(self) -> dict:
        return {
            "T_L_sign": self.T_L_sign,
            "I_b": self.I_b.to_dict(),
            "image_interval": self.image_interval.to_dict(),
        }


# ---------------------------------------------------------------- solving


@dataclass
class ContactSolution:
    Y0: float
    Y1: float
    Y0_bracket: tuple[Fraction, Fraction]
    Y1_bracket: tuple[Fraction, Fraction]
    in_region: bool
    jacobian: float
    isolated_certified: bool
    residual_F: float
    residual_G: float

    def to_dict(self) -> dict:
        def q(v: Fraction) -> str:
            return f"{v.numerator}/{v.denominator}"

        return {
            "Y0": self.Y0,
            "Y1": self.Y1,
            "Y0_exact_bracket": [q(v) for v in self.Y0_bracket],
            "Y1_exact_bracket": [q(v) for v in self.Y1_bracket],
            "in_region": self.in_region,
            "jacobian": self.jacobian,
            "isolated_certified": self.isolated_certified,
            "residual_F": self.residual_F,
            "residual_G": self.residual_G,
        }


@dataclass
class ContactSolutionSet:
    solutions: list[ContactSolution]
    solution_at_infinity: bool
    warnings: list[str] = field(default_factory=list)
    removed_axis_factor: tuple[int, int] = (0, 0)

    @property
    def k(self) -> int:
        """In-region solutions certified isolated by a nonzero Jacobian."""
        return sum(1 for s in self.solutions if s.in_region and s.isolated_certified)

    @property
    def uncertified_in_region(self) -> int:
        return sum(1 for s in self.solutions if s.in_region and not s.isolated_certified)

    def to_dict(self) -> dict:
        return {
            "solutions": [s.to_dict() for s in self.solutions],
            "solution_at_infinity": self.solution_at_infinity,
            "removed_axis_factor": list(self.removed_axis_factor),
            "k": self.k,
            "warnings": list(self.warnings),
        }


def _rel(p: BivarPoly, u: float, v: float) -> float:
    scale = p.abs_evalf(u, v)
    val = p.evalf(u, v)
    return abs(val) / scale if scale > 0 else abs(val)


def _newton2(f: BivarPoly, g: BivarPoly, u: float, v: float, iters: int = 8):
    fu, fv, gu, gv = f.diff(0), f.diff(1), g.diff(0), g.diff(1)
    for _ in range(iters):
        J = np.array([[fu.evalf(u, v), fv.evalf(u, v)], [gu.evalf(u, v), gv.evalf(u, v)]])
        r = np.array([f.evalf(u, v), g.evalf(u, v)])
        try:
            du, dv = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            break
        if not (math.isfinite(du) and math.isfinite(dv)):
            break
        u, v = u - du, v - dv
        if abs(du) <= 1e-16 * (1 + abs(u)) and abs(dv) <= 1e-16 * (1 + abs(v)):
            break
    return u, v


def _mid(br):
    return float((br[0] + br[1]) / 2)


def _within(x: float, br, slack: float = 1e-8) -> bool:
    lo, hi = float(br[0]), float(br[1])
    pad = slack * (1.0 + abs(x)) + (hi - lo)
    return lo - pad <= x <= hi + pad


def solve_system(Ft: BivarPoly, Gt: BivarPoly, region: RegionSpec | None = None) -> ContactSolutionSet:
    """Real solutions of Ft = Gt = 0 by exact elimination in both variables.

    Ft has degree <= 2 and Gt degree <= 3.  Raises DegenerateSystem when a
    resultant vanishes identically (common component, solution set infinite).
    """
    if Ft.is_zero() and Gt.is_zero():
        raise ValueError("solve_system needs Ft, Gt not both identically zero")
    if Ft.degree > 2 or Gt.degree > 3:
        raise ValueError(f"expected degrees <= (2, 3), got ({Ft.degree}, {Gt.degree})")
    if Ft.is_zero() or Gt.is_zero():
        raise DegenerateSystem("one equation vanishes identically")

    at_inf = binary_form_resultant(homogeneous_part(Ft, 2), homogeneous_part(Gt, 3), 2, 3) == 0
    # the axes Y0 = 0 and Y1 = 0 bound phi(U), so a shared axis factor can go
    warnings = []
    common = _common_monomial(Ft, Gt)
    if common != (0, 0):
        Ft, Gt = _divide_monomial(Ft, common), _divide_monomial(Gt, common)
        warnings.append(f"common factor Y0^{common[0]} Y1^{common[1]} removed (lies outside phi(U))")

    R0 = resultant(Ft, Gt, eliminate=1)  # polynomial in Y0
    R1 = resultant(Ft, Gt, eliminate=0)  # polynomial in Y1
    if not trim(R0) or not trim(R1):
        raise DegenerateSystem("Ft and Gt share a common component (resultant vanishes identically)")

    roots0 = isolate_real_roots(R0)
    roots1 = isolate_real_roots(R1)
    sols: list[ContactSolution] = []
    fu, fv, gu, gv = Ft.diff(0), Ft.diff(1), Gt.diff(0), Gt.diff(1)
    for b0 in roots0:
        for b1 in roots1:
            u0, v0 = _mid(b0), _mid(b1)
            if _rel(Ft, u0, v0) > 1e-6 or _rel(Gt, u0, v0) > 1e-6:
                continue
            u, v = _newton2(Ft, Gt, u0, v0)
            if not (_within(u, b0) and _within(v, b1)):
                u, v = u0, v0
            rf, rg = _rel(Ft, u, v), _rel(Gt, u, v)
            if rf > 1e-9 or rg > 1e-9:
                continue
            J = fu.evalf(u, v) * gv.evalf(u, v) - fv.evalf(u, v) * gu.evalf(u, v)
            jscale = math.hypot(fu.evalf(u, v), fv.evalf(u, v)) * math.hypot(gu.evalf(u, v), gv.evalf(u, v))
            iso = jscale > 0 and abs(J) > 1e-9 * jscale
            inside = region.contains_Y(u, v) if region is not None else False
            if not iso and inside:
                warnings.append(f"contact ({u:.6g}, {v:.6g}) has a singular Jacobian (multiple solution)")
            sols.append(ContactSolution(u, v, b0, b1, inside, J, iso, rf, rg))
    if len(sols) > 6:
        warnings.append(f"{len(sols)} real solutions exceed the Bezout count 6")
    for w in warnings:
        log.info(w)
    return ContactSolutionSet(sols, at_inf, warnings, common)


def _common_monomial(p: BivarPoly, q: BivarPoly) -> tuple[int, int]:
    keys = list(p.coeffs) + list(q.coeffs)
    return min(i for i, _ in keys), min(j for _, j in keys)


def _divide_monomial(p: BivarPoly, m: tuple[int, int]) -> BivarPoly:
    return BivarPoly({(i - m[0], j - m[1]): v for (i, j), v in p.coeffs.items()})


# ---------------------------------------------------------------- excluded point


@dataclass(frozen=True)
class ExcludedPoint:
    Y0: Fraction
    Y1: Fraction
    case: str
    outside: bool
    solves_system: bool | None = None

    def to_dict(self) -> dict:
        return {
            "Y0": f"{self.Y0.numerator}/{self.Y0.denominator}",
            "Y1": f"{self.Y1.numerator}/{self.Y1.denominator}",
            "Y0_float": float(self.Y0),
            "Y1_float": float(self.Y1),
            "case": self.case,
            "outside": self.outside,
            "solves_system": self.solves_system,
        }


def excluded_point(
    c: CanonicalPWL,
    region: RegionSpec | None = None,
    Ft: BivarPoly | None = None,
    Gt: BivarPoly | None = None,
) -> ExcludedPoint:
    """The point (a_L T_L / D_L, a_L^2 / D_L), i.e. phi of the two roots of W_L.

    The verdict follows the three sign cases; when a region is given its
    own membership test must agree.
    """
    TL, DL, aL, *_ = _exact(c)
    if DL == 0:
        raise NotApplicable("D_L = 0: the extra solution lies at infinity")
    Ys = (aL * TL / DL, aL * aL / DL)
    if DL > 0 or aL == 0:
        case, outside = "Y1>=0", Ys[1] >= 0
    elif aL < 0:
        case = "sign(Y0)=sign(T_L)"
        outside = TL == 0 or _sgn(Ys[0]) == _sgn(TL)
    else:
        case = "W_L roots off int(I_L)"
        # roots of W_L: y1* < 0 < y0*.  They come from the same routine that
        # closes I_L on the right, so y0* >= sup I_b holds without rounding slack
        roots = w_poly(float(TL), float(DL), float(aL)).real_roots()
        ypos, yneg = max(roots), min(roots)
        outside = ypos > 0 > yneg
        if region is not None:
            outside = outside and not region.I_b.interior_contains(ypos)
            outside = outside and not region.contains_y(ypos, yneg)
    if region is not None and case != "W_L roots off int(I_L)":
        outside = outside and not region.contains_Y(float(Ys[0]), float(Ys[1]))
    solves = None
    if Ft is not None and Gt is not None:
        solves = Ft(Ys[0], Ys[1]) == 0 and Gt(Ys[0], Ys[1]) == 0
    return ExcludedPoint(Ys[0], Ys[1], case, bool(outside), solves)


def infinity_degeneracy(Ft: BivarPoly, Gt: BivarPoly) -> bool:
    """True when the top-degree parts share a point at infinity."""
    return binary_form_resultant(homogeneous_part(Ft, 2), homogeneous_part(Gt, 3), 2, 3) == 0


# ---------------------------------------------------------------- conic branches


@dataclass(frozen=True)
class ConicInfo:
    kind: str
    singular: bool
    noncompact: int  # branches of the whole real conic
    in_region: int  # of those, branches meeting {Y1 < 0, sign(Y0) = s}
    singular_point: tuple[Fraction, Fraction] | None = None
    singular_in_quadrant: bool = False

    @property
    def smooth_in_quadrant(self) -> bool:
        """The conic is a 1-manifold inside the open quadrant."""
        if self.kind == "double_line":
            return False
        return not self.singular_in_quadrant

    def to_dict(self) -> dict:
        sp = None if self.singular_point is None else [float(v) for v in self.singular_point]
        return {
            "kind": self.kind,
            "singular": self.singular,
            "noncompact": self.noncompact,
            "in_region": self.in_region,
            "singular_point": sp,
            "singular_in_quadrant": self.singular_in_quadrant,
        }


def _singular_point(Ft: BivarPoly) -> tuple[Fraction, Fraction] | None:
    """Centre of a degenerate conic with a unique singular point (exact)."""
    A, B, C, D, E, _ = _conic_coeffs(Ft)
    det = 4 * A * C - B * B
    if det == 0:
        return None
    return ((B * E - 2 * C * D) / det, (B * D - 2 * A * E) / det)


def _conic_coeffs(Ft: BivarPoly):
    return (Ft[(2, 0)], Ft[(1, 1)], Ft[(0, 2)], Ft[(1, 0)], Ft[(0, 1)], Ft[(0, 0)])


def _det3(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _conic_kind(Ft: BivarPoly) -> tuple[str, bool]:
    A, B, C, D, E, F = _conic_coeffs(Ft)
    if A == 0 and B == 0 and C == 0:
        if D == 0 and E == 0:
            return ("empty" if F != 0 else "plane"), False
        return "line", False
    M = [[A, B / 2, D / 2], [B / 2, C, E / 2], [D / 2, E / 2, F]]
    Delta = _det3(M)
    delta = A * C - B * B / 4
    if Delta != 0:
        if delta > 0:
            return ("ellipse" if A * Delta < 0 else "imaginary_ellipse"), False
        if delta < 0:
            return "hyperbola", False
        return "parabola", False
    if delta < 0:
        return "intersecting_lines", True
    if delta > 0:
        return "point", True
    K = (A * F - D * D / 4) + (C * F - E * E / 4)
    if K < 0:
        return "parallel_lines", False
    if K == 0:
        return "double_line", True
    return "imaginary_parallel_lines", False


_NONCOMPACT = {
    "line": 1,
    "hyperbola": 2,
    "parabola": 1,
    "intersecting_lines": 2,
    "parallel_lines": 2,
    "double_line": 1,
}


def _quadrant_points(Ft: BivarPoly, s: int) -> list[tuple[float, float]]:
    """Points of {Ft = 0} inside {Y1 < 0, s Y0 > 0}, plus transversal boundary crossings."""
    A, B, C, D, E, F = (float(v) for v in _conic_coeffs(Ft))
    scale = max(1.0, *(abs(v) for v in (A, B, C, D, E, F)))
    grid = np.geomspace(1e-9, 1e9, 721) * (1.0 + abs(F) / scale)
    pts = []

    def roots2(a, b, c):
        if a == 0:
            return [] if b == 0 else [-c / b]
        disc = b * b - 4 * a * c
        if disc < 0:
            return []
        r = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(r, b))
        out = [q / a]
        if q != 0:
            out.append(c / q)
        return out

    for t in grid:
        u = s * t  # Y0 fixed, solve in Y1: C Y1^2 + (B u + E) Y1 + (A u^2 + D u + F)
        for v in roots2(C, B * u + E, A * u * u + D * u + F):
            if v < 0:
                pts.append((u, v))
        v = -t  # Y1 fixed, solve in Y0
        for u in roots2(A, B * v + D, C * v * v + E * v + F):
            if s * u > 0:
                pts.append((u, v))
    # simple roots on the open boundary rays are transversal crossings into the quadrant
    rays = [(roots2(A, D, F), lambda u: (u, 0.0), lambda u: s * u > 0, lambda u: 2 * A * u + D),
            (roots2(C, E, F), lambda v: (0.0, v), lambda v: v < 0, lambda v: 2 * C * v + E)]
    for rts, pt, ok, slope in rays:
        for r in rts:
            if ok(r) and slope(r) != 0:
                pts.append(pt(r))
    return pts


def _branch_id(Ft: BivarPoly, kind: str, p: tuple[float, float]) -> int:
    A, B, C, D, E, F = (float(v) for v in _conic_coeffs(Ft))
    if kind == "hyperbola":
        Q = np.array([[A, B / 2], [B / 2, C]])
        ctr = np.linalg.solve(2 * Q, -np.array([D, E]))
        w, V = np.linalg.eigh(Q)
        uv = V.T @ (np.array(p) - ctr)
        Fc = A * ctr[0] ** 2 + B * ctr[0] * ctr[1] + C * ctr[1] ** 2 + D * ctr[0] + E * ctr[1] + F
        # eigh sorts ascending: w[0] < 0 < w[1]; branches split along the axis
        # whose term has the sign opposite to -Fc
        axis = 1 if -Fc / w[1] > 0 else 0
        return int(uv[axis] > 0)
    if kind in ("parallel_lines", "intersecting_lines"):
        # split by the sign of the nearest factor through the quadratic form
        if kind == "parallel_lines":
            # Ft = A w^2 + D w + F with w = Y0 + B/(2A) Y1, or C w^2 + E w + F with w = Y1
            if A != 0:
                w_, ww = p[0] + 0.5 * B / A * p[1], np.roots([A, D, F])
            else:
                w_, ww = p[1], np.roots([C, E, F])
            return int(np.argmin(np.abs(np.real(ww) - w_)))
        Q = np.array([[A, B / 2], [B / 2, C]])
        ctr = np.linalg.solve(2 * Q, -np.array([D, E]))
        d = np.array(p) - ctr
        if A != 0:
            rr = np.roots([A, B, C])  # directions (r, 1)
            dirs = [np.array([r.real, 1.0]) for r in rr]
        else:
            dirs = [np.array([1.0, 0.0]), np.array([-C, B])]
        dist = [abs(d[0] * v[1] - d[1] * v[0]) / np.linalg.norm(v) for v in dirs]
        return int(np.argmin(dist))
    return 0


def classify_conic(Ft: BivarPoly, region: RegionSpec | None = None) -> ConicInfo:
    if Ft.degree > 2:
        raise ValueError("classify_conic needs a polynomial of degree <= 2")
    kind, singular = _conic_kind(Ft)
    total = _NONCOMPACT.get(kind, 0)
    sp = _singular_point(Ft) if kind in ("intersecting_lines", "point") else None
    s = region.y0_sign if region is not None else 0
    sp_in = sp is not None and s != 0 and sp[1] < 0 and _sgn(sp[0]) == s
    if region is None or total == 0:
        return ConicInfo(kind, singular, total, total if region is None else 0, sp, sp_in)
    if s == 0:
        return ConicInfo(kind, singular, total, 0, sp, sp_in)
    ids = {_branch_id(Ft, kind, p) for p in _quadrant_points(Ft, s)}
    return ConicInfo(kind, singular, total, min(len(ids), total, 2), sp, sp_in)


def count_noncompact_components(Ft: BivarPoly, region: RegionSpec | None = None) -> int:
    if Ft.is_zero():
        raise ValueError("count_noncompact_components needs Ft not identically zero")
    return classify_conic(Ft, region).in_region
