"""Exact rational polynomials: a small bivariate type and univariate helpers.

Univariate polynomials are plain lists of Fractions, lowest degree first.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

Exp = tuple[int, int]


def _q(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite coefficient {v}")
        return Fraction(v)
    return Fraction(v)


class BivarPoly:
    """Polynomial in two variables with exact rational coefficients.

    Only nonzero coefficients are stored, keyed by exponent pairs (i, j) of
    (y0, y1) -- or (Y0, Y1) after the symmetric change of variables.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[Exp, object] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            v = _q(v)
            if v:
                i, j = k
                if i < 0 or j < 0:
                    raise ValueError(f"negative exponent {k}")
                c[(int(i), int(j))] = v
        self._c = c

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, v) -> "BivarPoly":
        return cls({(0, 0): v})

    @classmethod
    def var(cls, which: int) -> "BivarPoly":
        return cls({(1, 0) if which == 0 else (0, 1): 1})

    @classmethod
    def univariate(cls, coeffs: Iterable, which: int = 0) -> "BivarPoly":
        out = {}
        for k, v in enumerate(coeffs):
            out[(k, 0) if which == 0 else (0, k)] = v
        return cls(out)

    # inspection ---------------------------------------------------------
    @property
    def coeffs(self) -> dict[Exp, Fraction]:
        return dict(self._c)

    def __getitem__(self, k: Exp) -> Fraction:
        return self._c.get(k, Fraction(0))

    def __iter__(self):
        return iter(sorted(self._c.items()))

    def __len__(self):
        return len(self._c)

    def is_zero(self) -> bool:
        return not self._c

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((i + j for i, j in self._c), default=-1)

    def degree_in(self, which: int) -> int:
        return max((k[which] for k in self._c), default=-1)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BivarPoly.const(other)
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __repr__(self):
        if not self._c:
            return "BivarPoly(0)"
        terms = " + ".join(f"({v})*y0^{i}*y1^{j}" for (i, j), v in sorted(self._c.items()))
        return f"BivarPoly({terms})"

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _lift(other) -> "BivarPoly":
        return other if isinstance(other, BivarPoly) else BivarPoly.const(other)

    def __add__(self, other):
        other = self._lift(other)
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return BivarPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, BivarPoly):
            s = _q(other)
            return BivarPoly({k: v * s for k, v in self._c.items()})
        c: dict[Exp, Fraction] = {}
        for (i1, j1), v1 in self._c.items():
            for (i2, j2), v2 in other._c.items():
                k = (i1 + i2, j1 + j2)
                c[k] = c.get(k, 0) + v1 * v2
        return BivarPoly(c)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = BivarPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def diff(self, which: int) -> "BivarPoly":
        c = {}
        for (i, j), v in self._c.items():
            if which == 0 and i:
                c[(i - 1, j)] = v * i
            elif which == 1 and j:
                c[(i, j - 1)] = v * j
        return BivarPoly(c)

    def swap(self) -> "BivarPoly":
        return BivarPoly({(j, i): v for (i, j), v in self._c.items()})

    def is_symmetric(self) -> bool:
        return self == self.swap()

    def divmod(self, g: "BivarPoly") -> tuple["BivarPoly", "BivarPoly"]:
        """Division by a single divisor in lex order (y0 > y1)."""
        if g.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lt = max(g._c)
        lc = g._c[lt]
        p = dict(self._c)
        q: dict[Exp, Fraction] = {}
        r: dict[Exp, Fraction] = {}
        while p:
            k = max(p)
            v = p.pop(k)
            if k[0] >= lt[0] and k[1] >= lt[1]:
                m = (k[0] - lt[0], k[1] - lt[1])
                f = v / lc
                q[m] = q.get(m, 0) + f
                for (gi, gj), gv in g._c.items():
                    kk = (gi + m[0], gj + m[1])
                    if kk == k:
                        continue
                    nv = p.get(kk, 0) - f * gv
                    if nv:
                        p[kk] = nv
                    else:
                        p.pop(kk, None)
            else:
                r[k] = r.get(k, 0) + v
        return BivarPoly(q), BivarPoly(r)

    # evaluation ---------------------------------------------------------
    def __call__(self, u, v):
        """Exact evaluation for rational inputs, float evaluation otherwise."""
        return sum((c * u**i * v**j for (i, j), c in self._c.items()), start=0 * u)

    def evalf(self, u, v):
        """Float (or numpy) evaluation by nested Horner in y0 then y1."""
        if not self._c:
            return 0.0 * u + 0.0 * v
        n0 = self.degree_in(0)
        n1 = self.degree_in(1)
        rows = [[0.0] * (n1 + 1) for _ in range(n0 + 1)]
        for (i, j), c in self._c.items():
            rows[i][j] = float(c)
        acc = 0.0
        for i in range(n0, -1, -1):
            inner = 0.0
            for j in range(n1, -1, -1):
                inner = inner * v + rows[i][j]
            acc = acc * u + inner
        return acc

    def abs_evalf(self, u, v):
        """Sum of |terms|: the scale against which a float value is judged zero."""
        return sum(abs(float(c)) * abs(u) ** i * abs(v) ** j for (i, j), c in self._c.items())

    def compose(self, p0: "BivarPoly", p1: "BivarPoly") -> "BivarPoly":
        """Substitute y0 -> p0, y1 -> p1."""
        out = BivarPoly()
        pw0 = [BivarPoly.const(1)]
        pw1 = [BivarPoly.const(1)]
        for _ in range(self.degree_in(0)):
            pw0.append(pw0[-1] * p0)
        for _ in range(self.degree_in(1)):
            pw1.append(pw1[-1] * p1)
        for (i, j), c in self._c.items():
            out = out + pw0[i] * pw1[j] * c
        return out

    def partial(self, which: int, value) -> list[Fraction]:
        """Substitute a value for one variable; returns a univariate list in the other."""
        value = _q(value)
        other = 1 - which
        n = self.degree_in(other)
        out = [Fraction(0)] * (n + 1)
        for k, c in self._c.items():
            out[k[other]] += c * value ** k[which]
        return trim(out)

    def as_univariate_in(self, which: int) -> list["BivarPoly"]:
        """Coefficients (polynomials in the other variable) of powers of `which`."""
        n = self.degree_in(which)
        out = [dict() for _ in range(n + 1)]
        for k, c in self._c.items():
            rest = list(k)
            rest[which] = 0
            out[k[which]][tuple(rest)] = c
        return [BivarPoly(d) for d in out]

    def leading_form(self) -> "BivarPoly":
        d = self.degree
        return BivarPoly({k: v for k, v in self._c.items() if sum(k) == d})

    # serialization ------------------------------------------------------
    def to_json(self) -> dict[str, str]:
        return {f"{i},{j}": f"{v.numerator}/{v.denominator}" for (i, j), v in sorted(self._c.items())}

    @classmethod
    def from_json(cls, d: Mapping[str, str]) -> "BivarPoly":
        out = {}
        for k, v in d.items():
            i, j = (int(s) for s in k.split(","))
            out[(i, j)] = Fraction(v)
        return cls(out)


Y0 = BivarPoly.var(0)
Y1 = BivarPoly.var(1)


# ---------------------------------------------------------------- univariate

def trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def deg(p: list) -> int:
    return len(trim(p)) - 1


def u_add(p, q):
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def u_mul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def u_scale(p, s):
    return trim([c * s for c in p])


def u_divmod(p, q):
    p = trim([Fraction(c) for c in p])
    q = trim([Fraction(c) for c in q])
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    if len(p) < len(q):
        return [], p
    out = [Fraction(0)] * (len(p) - len(q) + 1)
    lc = q[-1]
    while len(p) >= len(q) and p:
        f = p[-1] / lc
        k = len(p) - len(q)
        out[k] = f
        for i, c in enumerate(q):
            p[k + i] -= f * c
        p.pop()
        p = trim(p)
    return trim(out), p


def u_deriv(p):
    return trim([c * i for i, c in enumerate(p)][1:])


def u_monic(p):
    p = trim(p)
    return [c / p[-1] for c in p] if p else []


def u_gcd(p, q):
    p, q = trim(p), trim(q)
    while q:
        _, r = u_divmod(p, q)
        p, q = q, r
    return u_monic(p)


def u_eval(p, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def u_evalf(p, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + float(c)
    return acc


def squarefree(p):
    p = trim(p)
    if len(p) <= 2:
        return u_monic(p)
    g = u_gcd(p, u_deriv(p))
    q, r = u_divmod(p, g)
    assert not r
    return u_monic(q)


def _primitive(p):
    """Scale to integer coefficients with content 1 (same sign pattern)."""
    p = trim(p)
    if not p:
        return p
    den = 1
    for c in p:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return [Fraction(v // g) for v in ints]


def sturm_sequence(p) -> list[list]:
    p = _primitive(p)
    seq = [p, _primitive(u_deriv(p))]
    while True:
        _, r = u_divmod(seq[-2], seq[-1])
        if not r:
            break
        seq.append(_primitive([-c for c in r]))
    return seq


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_variations(seq, x) -> int:
    signs = [s for s in (_sign(u_eval(p, x)) for p in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sign_variations_at_inf(seq, which: int) -> int:
    signs = []
    for p in seq:
        s = _sign(p[-1]) if p else 0
        if which < 0 and (len(p) - 1) % 2:
            s = -s
        if s:
            signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def cauchy_bound(p) -> Fraction:
    p = trim(p)
    lc = abs(p[-1])
    return 1 + max((abs(c) / lc for c in p[:-1]), default=Fraction(0))


def count_real_roots(p, lo=None, hi=None) -> int:
    """Distinct real roots in (lo, hi] (whole line when both are None)."""
    p = trim(p)
    if len(p) <= 1:
        return 0
    seq = sturm_sequence(p)
    vlo = sign_variations_at_inf(seq, -1) if lo is None else sign_variations(seq, Fraction(lo))
    vhi = sign_variations_at_inf(seq, +1) if hi is None else sign_variations(seq, Fraction(hi))
    return vlo - vhi


def isolate_real_roots(p, width=Fraction(1, 10**12)) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (lo, hi], each holding exactly one distinct real root.

    Sturm counts isolate the roots; each interval is then shrunk below
    `width` by bisection on the sign of the square-free part.
    """
    p = trim([Fraction(c) for c in p])
    if len(p) <= 1:
        return []
    sf = squarefree(p)
    if len(sf) <= 1:
        return []
    seq = sturm_sequence(sf)
    B = cauchy_bound(sf)
    # dyadic bound keeps midpoints cheap
    Bd = Fraction(2) ** (int(B).bit_length() + 1)

    isolated = []
    stack = [(-Bd, Bd, sign_variations(seq, -Bd), sign_variations(seq, Bd))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        n = vlo - vhi
        if n == 0:
            continue
        if n == 1:
            isolated.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        vm = sign_variations(seq, mid)
        stack.append((lo, mid, vlo, vm))
        stack.append((mid, hi, vm, vhi))

    out = []
    for lo, hi in sorted(isolated):
        if u_eval(sf, hi) == 0:
            out.append((hi, hi))
            continue
        # lo may be the root of the neighbouring interval; hi is not a root here
        shi = _sign(u_eval(sf, hi))
        while hi - lo > width:
            mid = (lo + hi) / 2
            sm = _sign(u_eval(sf, mid))
            if sm == 0:
                lo = hi = mid
                break
            if sm == shi:
                hi = mid
            else:
                lo = mid
        out.append((lo, hi))
    return out


def _det(m: list[list[Fraction]]) -> Fraction:
    """Determinant by exact Gaussian elimination."""
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for cc in range(col, n):
                    m[r][cc] -= f * m[col][cc]
    return det


def sylvester_resultant(p: list, q: list) -> Fraction:
    """Resultant of two univariate polynomials with the given formal degrees."""
    m, n = len(p) - 1, len(q) - 1
    if m < 0 or n < 0:
        return Fraction(0)
    if m == 0:
        return Fraction(p[0]) ** n
    if n == 0:
        return Fraction(q[0]) ** m
    size = m + n
    rows = []
    for i in range(n):
        row = [Fraction(0)] * size
        for k, c in enumerate(reversed(p)):
            row[i + k] = Fraction(c)
        rows.append(row)
    for i in range(m):
        row = [Fraction(0)] * size
        for k, c in enumerate(reversed(q)):
            row[i + k] = Fraction(c)
        rows.append(row)
    return _det(rows)


def _interpolate(xs: list[Fraction], ys: list[Fraction]) -> list[Fraction]:
    """Exact Newton interpolation, returned in the monomial basis."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly: list[Fraction] = [coef[-1]]
    for i in range(n - 2, -1, -1):
        poly = u_add(u_mul(poly, [-xs[i], Fraction(1)]), [coef[i]])
    return trim(poly)


def resultant(f: BivarPoly, g: BivarPoly, eliminate: int) -> list[Fraction]:
    """Res(f, g) with respect to variable `eliminate`, as a univariate list in the other.

    Uses the actual degrees in the eliminated variable, evaluation at
    deg f * deg g + 1 integer points and exact interpolation.
    """
    keep = 1 - eliminate
    mf, mg = f.degree_in(eliminate), g.degree_in(eliminate)
    if mf < 0 or mg < 0:
        return []
    bound = max(f.degree, 0) * max(g.degree, 0)
    xs = [Fraction(k) for k in range(bound + 1)]
    ys = []
    for x in xs:
        fp = f.partial(keep, x)
        gp = g.partial(keep, x)
        fp = fp + [Fraction(0)] * (mf + 1 - len(fp))
        gp = gp + [Fraction(0)] * (mg + 1 - len(gp))
        ys.append(sylvester_resultant(fp, gp))
    return _interpolate(xs, ys)


def homogeneous_part(p: BivarPoly, d: int) -> BivarPoly:
    return BivarPoly({k: v for k, v in p.coeffs.items() if sum(k) == d})


def binary_form_resultant(f: BivarPoly, g: BivarPoly, df: int, dg: int) -> Fraction:
    """Resultant of two binary forms of formal degrees df, dg.

    Zero iff the forms share a projective root, which for the top-degree
    parts of two curves means a common point at infinity.
    """
    fp = [f[(df - k, k)] for k in range(df + 1)]
    gp = [g[(dg - k, k)] for k in range(dg + 1)]
    return sylvester_resultant(fp, gp)
