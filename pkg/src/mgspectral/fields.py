"""Spectral representations of real, zero-vertical-mean scalars on the 3-torus.

Convention: theta(x) = sum_k theta_hat(k) e^{i k.x} with k on the cube
|k_i| <= N.  Norms are plain coefficient sums (the (2 pi)^3 volume factor is
dropped; every inequality we check is homogeneous in it), so Parseval reads
||theta||_{L2}^2 = mean_x |theta(x)|^2 = sum_k |theta_hat(k)|^2.

Two invariants define the state space and are preserved by every constructor
and operation here:

* Hermitian symmetry  theta_hat(-k) = conj(theta_hat(k))   (real field),
* zero vertical mean  theta_hat(k)  = 0 on {k3 = 0}        (model consistency).

A LineField stores the one-dimensional reduction of a field supported on a
single frequency line: coefficients c_n for modes n p with c_0 = 0 and
c_{-n} = conj(c_n).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _fft
from .errors import DegenerateLineError, TruncationOverflowError
from .lattice import LineSpec

logger = logging.getLogger("mgspectral")


@dataclass(frozen=True)
class GridSpec:
    """Cube truncation |k_i| <= N with an oversampled physical grid.

    pad is the physical oversampling factor; quadratic products are alias-free
    iff the physical size reaches 3N + 1, i.e. pad >= 3/2.  Grids with a
    smaller pad may still be constructed for pure multiplier work, but the
    product machinery refuses them.
    """

    N: int
    pad: float = 1.5
    norm_convention: str = "coefficient"

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"truncation radius must be >= 2, got {self.N}")
        if self.pad < 1.0:
            raise ValueError(f"oversampling factor must be >= 1, got {self.pad}")

    @property
    def n_modes(self) -> int:
        return 2 * self.N + 1

    @property
    def phys_size(self) -> int:
        want = max(math.ceil(self.pad * self.n_modes), self.n_modes)
        return _fft.next_fast_len(want)

    @property
    def dealiased(self) -> bool:
        return self.pad >= 1.5 and self.phys_size >= 3 * self.N + 1

    def shape(self) -> tuple[int, int, int]:
        return (self.n_modes,) * 3


_WEIGHT_CACHE: dict = {}


def _ksq_cube(N: int) -> np.ndarray:
    key = ("ksq", N)
    if key not in _WEIGHT_CACHE:
        k = np.arange(-N, N + 1, dtype=np.float64)
        k1, k2, k3 = np.meshgrid(k, k, k, indexing="ij")
        _WEIGHT_CACHE[key] = k1 * k1 + k2 * k2 + k3 * k3
    return _WEIGHT_CACHE[key]


def _sobolev_weights(N: int, s: float, homogeneous: bool) -> np.ndarray:
    key = (N, float(s), bool(homogeneous))
    if key not in _WEIGHT_CACHE:
        ksq = _ksq_cube(N)
        if homogeneous:
            w = np.zeros_like(ksq)
            nz = ksq > 0
            w[nz] = ksq[nz] ** s
        else:
            w = (1.0 + ksq) ** s
        _WEIGHT_CACHE[key] = w
    return _WEIGHT_CACHE[key]


@dataclass
class SpectralField:
    """Truncated coefficient cube of a real, zero-vertical-mean scalar."""

    grid: GridSpec
    coeffs: np.ndarray  # complex128, shape (2N+1, 2N+1, 2N+1), index k + N

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid=grid, coeffs=np.zeros(grid.shape(), dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid: GridSpec, modes: dict) -> "SpectralField":
        """Build from {k: amplitude}, adding the conjugate mode at -k."""
        f = cls.zeros(grid)
        for k, a in modes.items():
            f.set_mode_pair(k, a)
        return f

    def copy(self) -> "SpectralField":
        return SpectralField(grid=self.grid, coeffs=self.coeffs.copy())

    def index(self, k) -> tuple[int, int, int]:
        N = self.grid.N
        i = tuple(int(c) + N for c in k)
        if any(j < 0 or j >= 2 * N + 1 for j in i):
            raise IndexError(f"mode {k} outside |k_i| <= {N}")
        return i

    def get(self, k) -> complex:
        return complex(self.coeffs[self.index(k)])

    def set_mode_pair(self, k, amplitude: complex):
        """Set theta_hat(k) = amplitude and theta_hat(-k) = conj(amplitude)."""
        if int(k[2]) == 0:
            raise ValueError(f"mode {k} sits on the zero-vertical-mean plane")
        self.coeffs[self.index(k)] = amplitude
        self.coeffs[self.index(tuple(-int(c) for c in k))] = np.conj(amplitude)

    # -- invariants ---------------------------------------------------------

    def hermitian_defect(self) -> float:
        rev = self.coeffs[::-1, ::-1, ::-1]
        return float(np.max(np.abs(self.coeffs - np.conj(rev))))

    def vertical_mean_defect(self) -> float:
        N = self.grid.N
        return float(np.max(np.abs(self.coeffs[:, :, N])))

    def validate(self, tol: float = 1e-12):
        scale = float(np.max(np.abs(self.coeffs))) or 1.0
        if self.hermitian_defect() > tol * scale:
            raise ValueError("Hermitian symmetry violated")
        if self.vertical_mean_defect() > tol * scale:
            raise ValueError("zero-vertical-mean constraint violated")

    def project(self) -> "SpectralField":
        """Orthogonal projection onto the Hermitian, zero-vertical-mean subspace."""
        rev = np.conj(self.coeffs[::-1, ::-1, ::-1])
        out = 0.5 * (self.coeffs + rev)
        out[:, :, self.grid.N] = 0.0
        return SpectralField(grid=self.grid, coeffs=out)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass
class LineField:
    """Coefficients c_n over modes n p of a single admissible frequency line."""

    line: LineSpec
    coeffs: np.ndarray  # complex128, length 2 N_L + 1, index n + N_L

    def __post_init__(self):
        if self.line.p[2] == 0:
            raise DegenerateLineError(f"line field requires p3 != 0, got p={self.line.p}")
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 1 or self.coeffs.size % 2 != 1:
            raise ValueError("line coefficients must be a 1-D array of odd length")

    @classmethod
    def zeros(cls, line: LineSpec, N_L: int) -> "LineField":
        return cls(line=line, coeffs=np.zeros(2 * N_L + 1, dtype=np.complex128))

    @property
    def N_L(self) -> int:
        return self.coeffs.size // 2

    def modes(self) -> np.ndarray:
        return np.arange(-self.N_L, self.N_L + 1)

    def get(self, n: int) -> complex:
        return complex(self.coeffs[n + self.N_L])

    def set_mode_pair(self, n: int, amplitude: complex):
        if n == 0:
            raise ValueError("c_0 is pinned to zero")
        self.coeffs[n + self.N_L] = amplitude
        self.coeffs[-n + self.N_L] = np.conj(amplitude)

    def copy(self) -> "LineField":
        return LineField(line=self.line, coeffs=self.coeffs.copy())

    def validate(self, tol: float = 1e-12):
        scale = float(np.max(np.abs(self.coeffs))) or 1.0
        if abs(self.coeffs[self.N_L]) > tol * scale:
            raise ValueError("c_0 must vanish")
        if np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) > tol * scale:
            raise ValueError("Hermitian symmetry violated")

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def sobolev_norm(f, s: float, homogeneous: bool = False) -> float:
    """H^s norm: (sum (1+|k|^2)^s |c_k|^2)^(1/2), or |k|^{2s} weights if
    homogeneous.  For a LineField the frequency of mode n is n p."""
    if s < 0:
        raise ValueError(f"Sobolev order must be >= 0, got {s}")
    if isinstance(f, SpectralField):
        w = _sobolev_weights(f.grid.N, s, homogeneous)
        return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))
    if isinstance(f, LineField):
        n = f.modes().astype(np.float64)
        ksq = n * n * f.line.p_norm_sq
        if homogeneous:
            w = np.zeros_like(ksq)
            nz = ksq > 0
            w[nz] = ksq[nz] ** s
        else:
            w = (1.0 + ksq) ** s
        return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))
    raise TypeError(f"unsupported field type {type(f)!r}")


def embed_line(f: LineField, grid: GridSpec) -> SpectralField:
    """Scatter line coefficients onto the cube; errors if a mode overflows."""
    p = f.line.p
    N = grid.N
    step = max(abs(c) for c in p)
    if f.N_L * step > N:
        raise TruncationOverflowError(
            f"line mode {f.N_L}*{p} exceeds grid truncation N={N}")
    out = SpectralField.zeros(grid)
    for n in range(-f.N_L, f.N_L + 1):
        if n == 0:
            continue
        out.coeffs[out.index((n * p[0], n * p[1], n * p[2]))] = f.coeffs[n + f.N_L]
    return out


def restrict_line(f: SpectralField, line: LineSpec):
    """Collect on-line coefficients and measure the off-line energy fraction.

    Returns (LineField, leakage) with leakage = sqrt(off-line energy / total
    energy); zero fields have leakage 0 by convention.  The off-line energy
    is summed directly over the complement (differencing the two totals
    would lose it to cancellation).
    """
    N = f.grid.N
    p = line.p
    nmax = N // max(abs(c) for c in p)
    lf = LineField.zeros(line, nmax)
    for n in range(-nmax, nmax + 1):
        if n == 0:
            continue
        lf.coeffs[n + nmax] = f.coeffs[f.index((n * p[0], n * p[1], n * p[2]))]
    absq = np.abs(f.coeffs) ** 2
    off = float(np.sum(absq[~line_mask(f.grid, line)]))
    total = float(np.sum(absq))
    leakage = math.sqrt(off / total) if total > 0 else 0.0
    return lf, leakage


def line_mask(grid: GridSpec, line: LineSpec) -> np.ndarray:
    """Boolean cube marking the modes n p inside the truncation."""
    mask = np.zeros(grid.shape(), dtype=bool)
    p = line.p
    N = grid.N
    nmax = N // max(abs(c) for c in p)
    for n in range(-nmax, nmax + 1):
        mask[n * p[0] + N, n * p[1] + N, n * p[2] + N] = True
    return mask


def random_line_data(line: LineSpec, N_L: int, beta: float, seed: int,
                     amplitude: float = 1.0) -> LineField:
    """Seeded random line data with |c_n| = amplitude |n|^{-beta}.

    Phases are deterministic in the seed; the same seed reproduces the field
    bit for bit.
    """
    f = LineField.zeros(line, max(N_L, 0))
    if N_L < 1:
        return f
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=N_L)
    for n in range(1, N_L + 1):
        f.set_mode_pair(n, amplitude * n ** (-beta) * np.exp(1j * phases[n - 1]))
    return f


def random_field(grid: GridSpec, beta: float, amplitude: float, seed: int,
                 kmax: int | None = None) -> SpectralField:
    """Seeded generic 3-D data with spectrum |theta_hat| ~ (1+|k|^2)^{-beta/2}.

    Gaussian phases, Hermitian-symmetrized, zero vertical mean.  kmax
    optionally restricts the support to |k|^2 <= kmax^2.
    """
    rng = np.random.default_rng(seed)
    shape = grid.shape()
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    ksq = _ksq_cube(grid.N)
    envelope = amplitude * (1.0 + ksq) ** (-beta / 2.0)
    if kmax is not None:
        envelope = envelope * (ksq <= kmax * kmax)
    f = SpectralField(grid=grid, coeffs=raw * envelope).project()
    f.coeffs[grid.N, grid.N, grid.N] = 0.0
    return f


def warn_if_undamped(f: SpectralField, rel_tol: float = 1e-14):
    """M3 vanishes on {k2 = 0}: energy there feels no damping and the decay
    theory does not apply.  Log a warning if initial data touches it."""
    N = f.grid.N
    plane = float(np.sum(np.abs(f.coeffs[:, N, :]) ** 2))
    total = f.energy()
    if total > 0 and plane > rel_tol * total:
        logger.warning(
            "initial data carries %.3e of its energy on {k2 = 0}; "
            "these modes are undamped", plane / total)


def _fft_layout(f: SpectralField, size: int) -> np.ndarray:
    """Scatter the centered cube into an FFT-ordered complex array."""
    N = f.grid.N
    if size < f.grid.n_modes:
        raise ValueError(f"physical size {size} cannot hold 2N+1={f.grid.n_modes} modes")
    out = np.zeros((size, size, size), dtype=np.complex128)
    pos = slice(0, N + 1)
    neg = slice(size - N, size)
    c = f.coeffs
    out[pos, pos, pos] = c[N:, N:, N:]
    out[pos, pos, neg] = c[N:, N:, :N]
    out[pos, neg, pos] = c[N:, :N, N:]
    out[pos, neg, neg] = c[N:, :N, :N]
    out[neg, pos, pos] = c[:N, N:, N:]
    out[neg, pos, neg] = c[:N, N:, :N]
    out[neg, neg, pos] = c[:N, :N, N:]
    out[neg, neg, neg] = c[:N, :N, :N]
    return out


def to_physical(f: SpectralField, size: int | None = None) -> np.ndarray:
    """Sample theta(x) = sum theta_hat(k) e^{i k.x} on a uniform grid
    x_j = 2 pi j / size.  Defaults to the grid's padded physical size."""
    size = f.grid.phys_size if size is None else int(size)
    spec = _fft_layout(f, size)
    phys = _fft.ifftn(spec) * size ** 3
    return np.real(phys)


def from_physical(arr: np.ndarray, grid: GridSpec) -> SpectralField:
    """Inverse of to_physical: collapse a real sample array to the cube."""
    arr = np.asarray(arr, dtype=np.float64)
    size = arr.shape[0]
    if arr.shape != (size, size, size):
        raise ValueError(f"expected a cubic array, got shape {arr.shape}")
    if size < grid.n_modes:
        raise ValueError(f"sample array of size {size} cannot resolve N={grid.N}")
    spec = _fft.fftn(arr.astype(np.complex128)) / size ** 3
    N = grid.N
    f = SpectralField.zeros(grid)
    pos = slice(0, N + 1)
    neg = slice(size - N, size)
    c = f.coeffs
    c[N:, N:, N:] = spec[pos, pos, pos]
    c[N:, N:, :N] = spec[pos, pos, neg]
    c[N:, :N, N:] = spec[pos, neg, pos]
    c[N:, :N, :N] = spec[pos, neg, neg]
    c[:N, N:, N:] = spec[neg, pos, pos]
    c[:N, N:, :N] = spec[neg, pos, neg]
    c[:N, :N, N:] = spec[neg, neg, pos]
    c[:N, :N, :N] = spec[neg, neg, neg]
    return f
