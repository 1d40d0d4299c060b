"""Integer frequency lattice, frequency lines through the origin, rational cones.

A frequency line L(q) is the set of integer lattice points proportional to a
nonzero rational direction q.  Reducing q to a primitive integer direction p
(content 1, first nonzero component positive) makes L(q) = {n p : n in Z}, so
line membership and equality tests are exact integer arithmetic.  The cone
K_C = {q : |q1|, |q3| <= C |q2|} selects the directions on which the
multiplier symbols are uniformly of order zero; membership is evaluated in
exact rational arithmetic because the aperture is a rational parameter and
float boundary cases would be ambiguous.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .errors import DegenerateLineError, NonpositiveApertureError, ZeroDirectionError

#: Integer frequency vector k in Z^3.  Plain tuples keep numpy interop trivial.
FrequencyVector = tuple[int, int, int]


def as_fraction(x) -> Fraction:
    """Coerce to an exact rational.

    Accepts int, Fraction and strings like "2/3" or "0.5".  Floats are
    accepted for convenience and are snapped to the nearest small rational
    (denominator <= 1e9); pass exact types when the distinction matters.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


@dataclass(frozen=True)
class LineSpec:
    """Frequency line through the origin.

    p is the primitive integer direction (gcd 1, first nonzero component
    positive); q is the rational triple the line was built from.
    """

    p: tuple[int, int, int]
    q: tuple[Fraction, Fraction, Fraction]

    @property
    def admissible(self) -> bool:
        """Lines with p3 = 0 carry no dynamics: all their modes have k3 = 0
        and are forced to zero by the zero-vertical-mean constraint."""
        return self.p[2] != 0

    def require_admissible(self):
        if not self.admissible:
            raise DegenerateLineError(f"line p={self.p} has p3 = 0")

    @property
    def p_norm_sq(self) -> int:
        return self.p[0] ** 2 + self.p[1] ** 2 + self.p[2] ** 2

    def __str__(self):
        return f"L{self.p}"


@dataclass(frozen=True)
class ConeSpec:
    """Rational cone K_C: directions q with |q1|, |q3| <= C |q2|."""

    aperture: Fraction

    def __post_init__(self):
        object.__setattr__(self, "aperture", as_fraction(self.aperture))
        if self.aperture <= 0:
            raise NonpositiveApertureError(f"cone aperture must be > 0, got {self.aperture}")


def canonicalize_line(q) -> LineSpec:
    """Reduce a rational direction to its primitive integer representative.

    Z^3 intersected with the rational line through q depends only on the
    primitive direction: clear denominators, divide by the gcd, and fix the
    sign so the first nonzero component is positive.
    """
    qf = tuple(as_fraction(c) for c in q)
    if len(qf) != 3:
        raise ValueError(f"direction must have 3 components, got {len(qf)}")
    if all(c == 0 for c in qf):
        raise ZeroDirectionError("line direction must be nonzero")
    denom = lcm(*(c.denominator for c in qf))
    ints = [int(c * denom) for c in qf]
    g = gcd(*(abs(c) for c in ints))
    ints = [c // g for c in ints]
    lead = next(c for c in ints if c != 0)
    if lead < 0:
        ints = [-c for c in ints]
    return LineSpec(p=(ints[0], ints[1], ints[2]), q=qf)


def cone_contains(cone: ConeSpec, q) -> bool:
    """Exact test of |q1| <= C|q2| and |q3| <= C|q2| for a nonzero rational q."""
    qf = tuple(as_fraction(c) for c in q)
    if all(c == 0 for c in qf):
        raise ZeroDirectionError("cone membership is undefined for q = 0")
    bound = cone.aperture * abs(qf[1])
    return abs(qf[0]) <= bound and abs(qf[2]) <= bound


def line_contains(line: LineSpec, k) -> bool:
    """True iff k = n p for some integer n (n = 0 included)."""
    k = tuple(int(c) for c in k)
    if k == (0, 0, 0):
        return True
    p = line.p
    n = None
    for ki, pi in zip(k, p):
        if pi == 0:
            if ki != 0:
                return False
        else:
            if ki % pi != 0:
                return False
            ni = ki // pi
            if n is None:
                n = ni
            elif ni != n:
                return False
    return n is not None


def line_modes(line: LineSpec, N: int) -> list[int]:
    """All nonzero n with |n p_i| <= N for every component, symmetric about 0."""
    if N < 1:
        raise ValueError(f"truncation radius must be >= 1, got {N}")
    step = max(abs(c) for c in line.p)
    m = N // step
    return [n for n in range(-m, m + 1) if n != 0]


def sample_cone_directions(cone: ConeSpec, n_samples: int, seed: int = 0,
                           require_admissible: bool = True,
                           max_coeff: int = 12) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Deterministic rejection sample of rational directions inside K_C.

    Components are drawn as fractions with numerator and denominator bounded
    by max_coeff; q2 is forced nonzero (cone membership implies it) and, if
    require_admissible, q3 is forced nonzero as well.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < n_samples:
        q2 = Fraction(rng.randint(1, max_coeff), rng.randint(1, max_coeff))
        if rng.random() < 0.5:
            q2 = -q2
        bound = cone.aperture * abs(q2)

        def draw(allow_zero):
            while True:
                c = Fraction(rng.randint(-max_coeff, max_coeff), rng.randint(1, max_coeff))
                if abs(c) <= bound and (allow_zero or c != 0):
                    return c

        q1 = draw(allow_zero=True)
        q3 = draw(allow_zero=not require_admissible)
        out.append((q1, q2, q3))
    return out
