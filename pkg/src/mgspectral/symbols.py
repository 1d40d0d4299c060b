"""Anisotropic multiplier symbols of the magneto-geostrophic constitutive law.

The velocity components are recovered from the scalar through Fourier
multipliers with rational symbols

    M1(k) = (k2 k3 |k|^2 - k1 k2^2 k3) / (k3^2 |k|^2 + k2^4)
    M2(k) = (-k1 k3 |k|^2 - k2^3 k3)  / (k3^2 |k|^2 + k2^4)
    M3(k) = k2^2 (k1^2 + k2^2)        / (k3^2 |k|^2 + k2^4)

set to zero on the plane {k3 = 0} (zero-vertical-mean constraint).  They are
even, homogeneous of degree zero, divergence-free (sum k_j M_j = 0) and M3 is
nonnegative, which is the damping mechanism behind the decay results checked
in the diagnostics module.  Identities are exercised in exact integer /
rational arithmetic; tabulated values are 64-bit floats obtained as a single
rounding of exact integer numerators and denominators.

Off the cone the symbols are unbounded: along curved regions
(k1, ~k1^r, 1) with 0 < r <= 1/2 they grow like (k1^r, k1, k1^{2r}), which
``asymptotic_probe`` measures as log-log slopes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    InsufficientSweepError,
    VerticalZeroModeError,
    ZeroFrequencyError,
)
from .lattice import ConeSpec, LineSpec, as_fraction, canonicalize_line


def _numden(k1: int, k2: int, k3: int):
    """Integer numerators and common denominator of (M1, M2, M3).

    Exact for Python ints; in float64 the same expressions are exact for
    |k_i| <~ 10^4 because every intermediate is an integer below 2^53.
    """
    ksq = k1 * k1 + k2 * k2 + k3 * k3
    den = k3 * k3 * ksq + k2 ** 4
    n1 = k2 * k3 * ksq - k1 * k2 * k2 * k3
    n2 = -k1 * k3 * ksq - k2 ** 3 * k3
    n3 = k2 * k2 * (k1 * k1 + k2 * k2)
    return n1, n2, n3, den


def eval_M_exact(k) -> tuple[Fraction, Fraction, Fraction]:
    """(M1, M2, M3) at an integer frequency, in exact rational arithmetic."""
    k1, k2, k3 = (int(c) for c in k)
    if k3 == 0:
        return (Fraction(0), Fraction(0), Fraction(0))
    n1, n2, n3, den = _numden(k1, k2, k3)
    return (Fraction(n1, den), Fraction(n2, den), Fraction(n3, den))


def eval_M(k) -> tuple[float, float, float]:
    """(M1, M2, M3) at an integer frequency, one float rounding per component."""
    k1, k2, k3 = (int(c) for c in k)
    if k3 == 0:
        return (0.0, 0.0, 0.0)
    n1, n2, n3, den = _numden(k1, k2, k3)
    return (n1 / den, n2 / den, n3 / den)


def eval_sqrtM3(k) -> float:
    """Nonnegative square root of M3(k); zero on {k3 = 0}."""
    return math.sqrt(eval_M(k)[2])


def eval_A(k) -> complex:
    """Symbol of the pressure-to-scalar operator, as printed:

        A(k) = (1 / (i k3)) (k3^2 |k| + k2^4) / (|k|^4 + k2^4)

    Purely imaginary.  Exposed for inspection only; the dynamics consume the
    M_j symbols directly.
    """
    k1, k2, k3 = (int(c) for c in k)
    if k3 == 0:
        raise VerticalZeroModeError(f"A is undefined on k3 = 0, got k={k}")
    ksq = k1 * k1 + k2 * k2 + k3 * k3
    knorm = math.sqrt(ksq)
    value = (k3 * k3 * knorm + k2 ** 4) / (ksq * ksq + k2 ** 4)
    return complex(0.0, -value / k3)


def eval_b_multiplier(k) -> np.ndarray:
    """Magnetic recovery multipliers (i k2 / |k|^2) M_j(k), j = 1, 2, 3."""
    k1, k2, k3 = (int(c) for c in k)
    if (k1, k2, k3) == (0, 0, 0):
        raise ZeroFrequencyError("magnetic multiplier is undefined at k = 0")
    ksq = k1 * k1 + k2 * k2 + k3 * k3
    m = eval_M((k1, k2, k3))
    return np.array([1j * k2 / ksq * mj for mj in m], dtype=np.complex128)


@dataclass(frozen=True)
class LineConstants:
    """Constant symbol values on a line (degree-0 homogeneity plus evenness
    make M_j constant on L \\ {0})."""

    m_lower: float      # M3(p): lower damping constant, the decay rate
    m_upper: float      # max_j |M_j(p)|
    components: tuple[float, float, float]


def line_constants(line: LineSpec) -> LineConstants:
    line.require_admissible()
    m = eval_M(line.p)
    m_lower = m[2]
    m_upper = max(abs(c) for c in m)
    return LineConstants(m_lower=m_lower, m_upper=m_upper, components=m)


@dataclass(frozen=True)
class ConeBounds:
    """Explicit cone-wide bounds from the order-zero lemmas.

    m_upper = max{C + 2C^3 + C^2, C^2 + 2C^4 + C, 1 + C^2} dominates every
    |M_j| on K_C (the q-dependent factor in the lemma displays is <= 1);
    m_lower = 1 / (C^2 + 2C^4 + 1) bounds M3 from below.  Both degrade as the
    aperture grows: m_upper blows up and m_lower goes to zero.
    """

    m_lower: float
    m_upper: float


def cone_bounds(cone) -> ConeBounds:
    if not isinstance(cone, ConeSpec):
        cone = ConeSpec(as_fraction(cone))
    c = cone.aperture
    upper = max(c + 2 * c ** 3 + c ** 2, c ** 2 + 2 * c ** 4 + c, 1 + c ** 2)
    lower = Fraction(1) / (c ** 2 + 2 * c ** 4 + 1)
    return ConeBounds(m_lower=float(lower), m_upper=float(upper))


def sampled_cone_supremum(cone: ConeSpec, n_samples: int = 200, seed: int = 0):
    """Empirical (min M3, max max_j |M_j|) over sampled admissible cone lines.

    Validates the explicit coefficient polynomials of cone_bounds against the
    lattice: the sampled range must sit inside [m_lower, m_upper].
    """
    from .lattice import sample_cone_directions

    lo = math.inf
    hi = 0.0
    for q in sample_cone_directions(cone, n_samples, seed=seed, require_admissible=True):
        c = line_constants(canonicalize_line(q))
        lo = min(lo, c.m_lower)
        hi = max(hi, c.m_upper)
    return lo, hi


def k1_sweep(lo: int, hi: int, per_octave: int = 2) -> np.ndarray:
    """Geometric integer sweep of k1 values covering [lo, hi]."""
    if not (1 <= lo < hi):
        raise ValueError(f"need 1 <= lo < hi, got {lo}, {hi}")
    n = max(2, int(round(per_octave * math.log2(hi / lo))) + 1)
    vals = np.unique(np.round(np.geomspace(lo, hi, n)).astype(np.int64))
    return vals


@dataclass(frozen=True)
class ProbeFit:
    """Least-squares log-log slopes of |M_j(k1, round(k1^r), 1)| vs k1."""

    r: float
    slopes: tuple[float, float, float]
    k1_values: tuple[int, ...]


def asymptotic_probe(r: float, k1_values) -> ProbeFit:
    if not (0.0 < r <= 0.5):
        raise ValueError(f"curved-region exponent must lie in (0, 1/2], got {r}")
    k1s = np.asarray(list(k1_values), dtype=np.int64)
    if k1s.size < 6:
        raise InsufficientSweepError(f"probe sweep needs >= 6 points, got {k1s.size}")
    logk = np.log(k1s.astype(np.float64))
    slopes = []
    for j in range(3):
        vals = np.array([abs(eval_M((int(k1), int(round(k1 ** r)), 1))[j]) for k1 in k1s])
        slope = np.polyfit(logk, np.log(vals), 1)[0]
        slopes.append(float(slope))
    return ProbeFit(r=float(r), slopes=tuple(slopes), k1_values=tuple(int(v) for v in k1s))


def multiplier_cube(N: int):
    """Vectorized symbol arrays over the cube |k_i| <= N.

    Returns float64 arrays (M1, M2, M3, sqrtM3, ksq) indexed by k + N along
    each axis.  Numerators and denominators are exact int64 integers, so each
    float entry is a single rounding of the rational value.
    """
    k = np.arange(-N, N + 1, dtype=np.int64)
    k1, k2, k3 = np.meshgrid(k, k, k, indexing="ij")
    ksq = k1 * k1 + k2 * k2 + k3 * k3
    den = k3 * k3 * ksq + k2 ** 4
    den_safe = np.where(den == 0, 1, den).astype(np.float64)
    n1 = (k2 * k3 * ksq - k1 * k2 * k2 * k3).astype(np.float64)
    n2 = (-k1 * k3 * ksq - k2 ** 3 * k3).astype(np.float64)
    n3 = (k2 * k2 * (k1 * k1 + k2 * k2)).astype(np.float64)
    mask = (k3 != 0).astype(np.float64)
    m1 = n1 / den_safe * mask
    m2 = n2 / den_safe * mask
    m3 = n3 / den_safe * mask
    return m1, m2, m3, np.sqrt(m3), ksq.astype(np.float64)


@dataclass(frozen=True)
class SymbolTable:
    """Precomputed multiplier values over a truncated lattice.

    Arrays are indexed [k1 + N, k2 + N, k3 + N]; all vanish identically on
    {k3 = 0} and sqrtM3**2 reproduces M3 to rounding.
    """

    N: int
    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    sqrtM3: np.ndarray

    def value_at(self, k):
        i = tuple(int(c) + self.N for c in k)
        return (self.M1[i], self.M2[i], self.M3[i], self.sqrtM3[i])

    def write_csv(self, path, k3_slices=None):
        """Dump rows k1,k2,k3,M1,M2,M3,sqrtM3 in lexicographic k order.

        k3_slices optionally restricts to a few horizontal planes to keep
        artifacts small; None dumps the full cube.
        """
        N = self.N
        ks = range(-N, N + 1)
        slices = list(ks) if k3_slices is None else sorted(int(v) for v in k3_slices)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k1", "k2", "k3", "M1", "M2", "M3", "sqrtM3"])
            for k1 in ks:
                for k2 in ks:
                    for k3 in slices:
                        i = (k1 + N, k2 + N, k3 + N)
                        w.writerow([k1, k2, k3,
                                    repr(float(self.M1[i])), repr(float(self.M2[i])),
                                    repr(float(self.M3[i])), repr(float(self.sqrtM3[i]))])


def build_symbol_table(N: int) -> SymbolTable:
    m1, m2, m3, s3, _ = multiplier_cube(N)
    return SymbolTable(N=N, M1=m1, M2=m2, M3=m3, sqrtM3=s3)
