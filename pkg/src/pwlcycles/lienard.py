"""Two-zone systems, their Lienard canonical form and the W polynomials.

A general system reads  x' = A_L x + b_L  (x1 <= 0),  x' = A_R x + b_R  (x1 >= 0).
The canonical form keeps only traces, determinants and three offsets:

    left  (x < 0):  x' = T_L x - y,      y' = D_L x - a_L
    right (x > 0):  x' = T_R x - y + b,  y' = D_R x - a_R
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np

from .errors import NoCrossingDynamics, SpecFileError

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

DEFAULT_CAP = 1e6

Side = Literal["left", "right"]


@dataclass(frozen=True)
class GeneralPWL:
    A_L: tuple[tuple[float, float], tuple[float, float]]
    A_R: tuple[tuple[float, float], tuple[float, float]]
    b_L: tuple[float, float]
    b_R: tuple[float, float]

    def __post_init__(self):
        vals = [*np.ravel(self.A_L), *np.ravel(self.A_R), *self.b_L, *self.b_R]
        if len(vals) != 12:
            raise ValueError("A_L, A_R must be 2x2 and b_L, b_R 2-vectors")
        if not all(math.isfinite(float(v)) for v in vals):
            raise ValueError("all entries of a GeneralPWL must be finite")

    @classmethod
    def from_arrays(cls, A_L, A_R, b_L, b_R) -> "GeneralPWL":
        def mat(m):
            m = np.asarray(m, dtype=float).reshape(2, 2)
            return (tuple(float(v) for v in m[0]), tuple(float(v) for v in m[1]))

        def vec(v):
            v = np.asarray(v, dtype=float).reshape(2)
            return (float(v[0]), float(v[1]))

        return cls(mat(A_L), mat(A_R), vec(b_L), vec(b_R))


@dataclass(frozen=True)
class CanonicalPWL:
    T_L: float
    D_L: float
    a_L: float
    T_R: float
    D_R: float
    a_R: float
    b: float

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not math.isfinite(v):
                raise ValueError(f"canonical parameter {name} is not finite: {v}")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.T_L, self.D_L, self.a_L, self.T_R, self.D_R, self.a_R, self.b)

    def exact(self) -> dict[str, Fraction]:
        """Parameters promoted verbatim to exact rationals."""
        return {k: Fraction(v) for k, v in asdict(self).items()}

    def left(self) -> tuple[float, float, float]:
        return self.T_L, self.D_L, self.a_L

    def right(self) -> tuple[float, float, float]:
        return self.T_R, self.D_R, self.a_R

    def is_continuous(self) -> bool:
        """Matching vector fields on x = 0 (the Lum-Chua setting)."""
        return self.b == 0 and self.a_L == self.a_R


@dataclass(frozen=True)
class QuadraticW:
    """W(y) = D y^2 + negaT y + a2, with negaT = -a T and a2 = a^2."""

    D: float
    negaT: float
    a2: float
    side: Side = "left"

    def __call__(self, y):
        return (self.D * y + self.negaT) * y + self.a2

    def real_roots(self) -> list[float]:
        """Real roots in increasing order, a double root listed once."""
        D, B, C = self.D, self.negaT, self.a2
        if D == 0:
            if B == 0:
                return []
            return [-C / B]
        disc = B * B - 4 * D * C
        if disc < 0:
            return []
        if disc == 0:
            return [-B / (2 * D)]
        # larger-magnitude root first, the other from the product of roots
        q = -0.5 * (B + math.copysign(math.sqrt(disc), B))
        r1 = q / D
        r2 = C / q if q != 0 else -B / D - r1
        return sorted({r1, r2})


@dataclass(frozen=True)
class SpectralClass:
    tag: Literal["complex_pair", "real_distinct", "real_double"]
    discriminant: float


@dataclass(frozen=True)
class DomainInterval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False
    bounded: bool = True

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def degenerate(self) -> bool:
        """Empty interior (a single point)."""
        return self.lo >= self.hi

    def contains(self, y: float) -> bool:
        if y < self.lo or y > self.hi:
            return False
        if y == self.lo:
            return self.lo_closed
        if y == self.hi:
            return self.hi_closed
        return True

    def interior_contains(self, y: float) -> bool:
        return self.lo < y < self.hi

    def shift(self, b: float) -> "DomainInterval":
        return DomainInterval(self.lo + b, self.hi + b, self.lo_closed, self.hi_closed, self.bounded)

    def intersect(self, other: "DomainInterval") -> "DomainInterval":
        if self.lo > other.lo or (self.lo == other.lo and not self.lo_closed):
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = other.lo, other.lo_closed
        if self.hi < other.hi or (self.hi == other.hi and not self.hi_closed):
            hi, hi_closed, bounded = self.hi, self.hi_closed, self.bounded
        else:
            hi, hi_closed, bounded = other.hi, other.hi_closed, other.bounded
        if hi < lo:
            hi = lo
        return DomainInterval(lo, hi, lo_closed, hi_closed, bounded)

    def to_dict(self) -> dict:
        return asdict(self)


class HalfMapIntervals(NamedTuple):
    """Domain of a half-map on {y0 >= 0} and the matching image interval on {y1 <= 0}."""

    domain: DomainInterval
    image: DomainInterval


def to_canonical(sys: GeneralPWL) -> CanonicalPWL:
    (l11, l12), (l21, l22) = sys.A_L
    (r11, r12), (r21, r22) = sys.A_R
    if not l12 * r12 > 0:
        raise NoCrossingDynamics(
            f"a12_L * a12_R = {l12 * r12} <= 0: no crossing limit cycles are possible"
        )
    bl1, bl2 = sys.b_L
    br1, br2 = sys.b_R
    # adding 0.0 turns a signed zero into +0.0
    return CanonicalPWL(
        T_L=l11 + l22 + 0.0,
        D_L=l11 * l22 - l12 * l21 + 0.0,
        a_L=l12 * bl2 - l22 * bl1 + 0.0,
        T_R=r11 + r22 + 0.0,
        D_R=r11 * r22 - r12 * r21 + 0.0,
        a_R=r12 * br2 - r22 * br1 + 0.0,
        b=l12 * br1 / r12 - bl1 + 0.0,
    )


def w_poly(T: float, D: float, a: float, side: Side = "left") -> QuadraticW:
    return QuadraticW(D=D, negaT=-a * T, a2=a * a, side=side)


def spectral_class(T: float, D: float) -> SpectralClass:
    disc = T * T - 4 * D
    if disc < 0:
        tag = "complex_pair"
    elif disc == 0:
        tag = "real_double"
    else:
        tag = "real_distinct"
    return SpectralClass(tag, disc)


def domain_interval(W: QuadraticW, cap: float = DEFAULT_CAP) -> HalfMapIntervals:
    """Half-map domain and image read off the roots of W.

    The smallest positive root closes the domain on the right and the greatest
    negative root closes the image on the left; without such roots the
    interval is truncated at +cap / -cap and flagged unbounded.
    """
    if not cap > 0:
        raise ValueError("cap must be positive")
    roots = W.real_roots()
    pos = [r for r in roots if r > 0]
    neg = [r for r in roots if r < 0]

    # W vanishing at 0 and negative right after it leaves only the point y0 = 0
    if W.a2 == 0 and (W.negaT < 0 or (W.negaT == 0 and W.D <= 0)):
        point = DomainInterval(0.0, 0.0, True, True, True)
        return HalfMapIntervals(point, point)

    if pos:
        dom = DomainInterval(0.0, min(pos), True, True, True)
    else:
        dom = DomainInterval(0.0, cap, True, False, False)
    if neg:
        img = DomainInterval(max(neg), 0.0, True, True, True)
    else:
        img = DomainInterval(-cap, 0.0, False, True, False)
    return HalfMapIntervals(dom, img)


# ---------------------------------------------------------------- file input

def _canonical_from_mapping(m: dict) -> CanonicalPWL:
    keys = ("T_L", "D_L", "a_L", "T_R", "D_R", "a_R", "b")
    missing = [k for k in keys if k not in m]
    if missing:
        raise SpecFileError(f"canonical section missing keys: {', '.join(missing)}")
    try:
        return CanonicalPWL(**{k: float(m[k]) for k in keys})
    except (TypeError, ValueError) as exc:
        raise SpecFileError(f"bad canonical parameters: {exc}") from exc


def _general_from_mapping(m: dict) -> GeneralPWL:
    keys = ("A_L", "A_R", "b_L", "b_R")
    missing = [k for k in keys if k not in m]
    if missing:
        raise SpecFileError(f"general section missing keys: {', '.join(missing)}")
    try:
        return GeneralPWL.from_arrays(m["A_L"], m["A_R"], m["b_L"], m["b_R"])
    except (TypeError, ValueError) as exc:
        raise SpecFileError(f"bad general system: {exc}") from exc


def parse_system(data: dict) -> GeneralPWL | CanonicalPWL:
    if not isinstance(data, dict):
        raise SpecFileError("system file must hold a table/object at the top level")
    if "canonical" in data and "general" in data:
        raise SpecFileError("give either a 'general' or a 'canonical' section, not both")
    if "canonical" in data:
        return _canonical_from_mapping(data["canonical"])
    if "general" in data:
        return _general_from_mapping(data["general"])
    raise SpecFileError("system file needs a 'general' or 'canonical' section")


def load_system(path: str | Path) -> GeneralPWL | CanonicalPWL:
    """Read a TOML or JSON system file (matrices row-major)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecFileError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise SpecFileError(f"cannot parse {path}: {exc}") from exc
    return parse_system(data)


def canonical_of(system: GeneralPWL | CanonicalPWL) -> CanonicalPWL:
    if isinstance(system, CanonicalPWL):
        return system
    return to_canonical(system)
