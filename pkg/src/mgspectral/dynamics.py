"""Constitutive operators and the advection term of the perturbed system.

Around the linear background profile (vertical coordinate itself, slope 1)
the perturbation scalar theta obeys

    d/dt theta + u . grad theta = -M3[theta],      u_j = M_j[theta],

optionally regularized by hyperdissipation eps |k|^2 and fractional
diffusion eps_kappa |k|^{2 gamma}.  The full linear damping symbol is

    sigma(k) = M3(k) + eps |k|^2 + eps_kappa |k|^{2 gamma}.

The quadratic term is evaluated pseudo-spectrally in divergence form
u . grad theta = div(u theta) on a zero-padded physical grid (3/2 rule), so
retained-mode products are exact convolutions: support preservation on
frequency lines and the energy neutrality of advection then hold to rounding.
Products can generate {k3 = 0} modes for generic data; these are projected
out on every evaluation and the removed energy is reported, keeping the
modeling choice auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _fft, symbols
from .errors import PadTooSmallError
from .fields import GridSpec, LineField, SpectralField

_OPS_CACHE: dict = {}


@dataclass(frozen=True)
class ModelParams:
    """Dissipation and background parameters.

    eps_hyper is the hyperdissipation strength of the regularized scheme,
    eps_kappa and gamma the optional fractional diffusivity, omega_prime the
    slope of the linear background profile (1 for the stability theory; kept
    explicit so the damping term -u3 * omega_prime stays legible).
    """

    eps_hyper: float = 0.0
    eps_kappa: float = 0.0
    gamma: float = 1.0
    omega_prime: float = 1.0

    def __post_init__(self):
        if self.eps_hyper < 0 or self.eps_kappa < 0:
            raise ValueError("dissipation strengths must be nonnegative")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError(f"fractional exponent must lie in (0, 1], got {self.gamma}")

    @property
    def non_diffusive(self) -> bool:
        return self.eps_hyper == 0.0 and self.eps_kappa == 0.0


def linear_symbol(k, params: ModelParams) -> float:
    """sigma(k) = omega' M3(k) + eps |k|^2 + eps_kappa |k|^{2 gamma}."""
    k1, k2, k3 = (int(c) for c in k)
    ksq = float(k1 * k1 + k2 * k2 + k3 * k3)
    m3 = symbols.eval_M((k1, k2, k3))[2]
    out = params.omega_prime * m3 + params.eps_hyper * ksq
    if params.eps_kappa:
        out += params.eps_kappa * ksq ** params.gamma
    return out


def line_symbol_values(line, N_L: int, params: ModelParams) -> np.ndarray:
    """sigma on the modes n p of a line, n = -N_L .. N_L.

    The M3 part is constant on the line; the dissipative parts scale with
    |n p|^2.  The float arithmetic mirrors the cube path exactly so that
    semigroup application commutes with embedding bit for bit.
    """
    m3 = symbols.eval_M(line.p)[2]
    n = np.arange(-N_L, N_L + 1, dtype=np.float64)
    ksq = n * n * float(line.p_norm_sq)
    out = params.omega_prime * m3 + params.eps_hyper * ksq
    if params.eps_kappa:
        nz = ksq > 0
        frac = np.zeros_like(ksq)
        frac[nz] = ksq[nz] ** params.gamma
        out = out + params.eps_kappa * frac
    return out


class SpectralOperators:
    """Per-grid multiplier tables, padded-transform plumbing and scratch.

    The padded product pipeline works on the rfft half-spectrum (k3 >= 0):
    the cube half is scattered into the four (k1, k2) corner blocks of the
    padded layout, transformed, multiplied pointwise in physical space, and
    gathered back; the full cube is then reconstructed by conjugate
    reflection, which enforces Hermitian symmetry exactly.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        N = grid.N
        self.N = N
        m1, m2, m3, s3, ksq = symbols.multiplier_cube(N)
        self.M1, self.M2, self.M3, self.sqrtM3 = m1, m2, m3, s3
        self.ksq = ksq
        self.Msq_sum = m1 * m1 + m2 * m2 + m3 * m3
        k = np.arange(-N, N + 1, dtype=np.float64)
        self.K1 = k[:, None, None]
        self.K2 = k[None, :, None]
        self.K3 = k[None, None, :]

        self.M = grid.phys_size
        self.H = self.M // 2 + 1
        # cube half-spectrum: axes 1, 2 full (2N+1), axis 3 restricted to k3 >= 0
        self._half_shape = (2 * N + 1, 2 * N + 1, N + 1)
        self._Mh = (m1[:, :, N:], m2[:, :, N:], m3[:, :, N:])
        # gradient factors i k_j on the half cube
        kh = np.arange(0, N + 1, dtype=np.float64)
        self._ik1h = 1j * k[:, None, None]
        self._ik2h = 1j * k[None, :, None]
        self._ik3h = 1j * kh[None, None, :]
        self._bmul = None
        self._divfac_sq = None
        self._maxM_sq = None
        self._pad_bufs: dict[int, np.ndarray] = {}

    # -- layout helpers -----------------------------------------------------

    def _half(self, cube: np.ndarray) -> np.ndarray:
        return cube[:, :, self.N:]

    def _full_from_half(self, half: np.ndarray) -> np.ndarray:
        """Rebuild the centered cube from k3 >= 0 data by conjugate reflection."""
        N = self.N
        full = np.empty((2 * N + 1, 2 * N + 1, 2 * N + 1), dtype=np.complex128)
        full[:, :, N:] = half
        full[:, :, :N] = np.conj(half[::-1, ::-1, N:0:-1])
        return full

    def _pad_slots(self, n: int) -> np.ndarray:
        """Zero-padded rfft-layout batch buffer; allocated once per slot
        count and reused (only the corner blocks are ever rewritten)."""
        buf = self._pad_bufs.get(n)
        if buf is None:
            buf = np.zeros((n, self.M, self.M, self.H), dtype=np.complex128)
            self._pad_bufs[n] = buf
        return buf

    def _scatter_into(self, buf: np.ndarray, half: np.ndarray):
        N, M = self.N, self.M
        pos = slice(0, N + 1)
        neg = slice(M - N, M)
        k3 = slice(0, N + 1)
        buf[pos, pos, k3] = half[N:, N:, :]
        buf[pos, neg, k3] = half[N:, :N, :]
        buf[neg, pos, k3] = half[:N, N:, :]
        buf[neg, neg, k3] = half[:N, :N, :]

    def _gather(self, buf: np.ndarray) -> np.ndarray:
        N, M = self.N, self.M
        half = np.empty(self._half_shape, dtype=np.complex128)
        pos = slice(0, N + 1)
        neg = slice(M - N, M)
        k3 = slice(0, N + 1)
        half[N:, N:, :] = buf[pos, pos, k3]
        half[N:, :N, :] = buf[pos, neg, k3]
        half[:N, N:, :] = buf[neg, pos, k3]
        half[:N, :N, :] = buf[neg, neg, k3]
        return half

    def to_phys_batch(self, halves) -> np.ndarray:
        """Batched unscaled inverse transform of cube halves -> (n, M, M, M).

        The M^3 convention factor is deferred to the forward gather, where
        it cancels all but one power."""
        buf = self._pad_slots(len(halves))
        for slot, half in zip(buf, halves):
            self._scatter_into(slot, half)
        return _fft.irfftn(buf, s=(self.M, self.M, self.M), axes=(1, 2, 3))

    def to_phys(self, half: np.ndarray) -> np.ndarray:
        return self.to_phys_batch([half])[0]

    def from_phys_batch(self, phys_batch: np.ndarray):
        spec = _fft.rfftn(phys_batch, axes=(1, 2, 3))
        scale = float(self.M) ** 3
        return [self._gather(s) * scale for s in spec]

    def from_phys(self, phys: np.ndarray) -> np.ndarray:
        return self.from_phys_batch(phys[None, ...])[0]

    # -- operators ----------------------------------------------------------

    def velocity_cubes(self, coeffs: np.ndarray):
        return (self.M1 * coeffs, self.M2 * coeffs, self.M3 * coeffs)

    def magnetic_cubes(self, coeffs: np.ndarray):
        if self._bmul is None:
            ksq_safe = np.where(self.ksq == 0, 1.0, self.ksq)
            factor = 1j * self.K2 / ksq_safe
            self._bmul = (factor * self.M1, factor * self.M2, factor * self.M3)
        return tuple(b * coeffs for b in self._bmul)

    def divergence_stats(self, u_cubes):
        """(max |k . u_hat|, max |u_hat|) over the cube."""
        div = self.K1 * u_cubes[0] + self.K2 * u_cubes[1] + self.K3 * u_cubes[2]
        max_div = float(np.max(np.abs(div)))
        max_u = max(float(np.max(np.abs(u))) for u in u_cubes)
        return max_div, max_u

    def divergence_stats_from_energy(self, absq: np.ndarray):
        """Same pair computed from |theta_hat|^2 via the theta-independent
        factors |sum_j k_j M_j| and max_j |M_j|; avoids building the
        velocity cubes on every record."""
        if self._divfac_sq is None:
            div = self.K1 * self.M1 + self.K2 * self.M2 + self.K3 * self.M3
            self._divfac_sq = div * div
            self._maxM_sq = np.maximum(np.maximum(np.abs(self.M1), np.abs(self.M2)),
                                       np.abs(self.M3)) ** 2
        max_div = math.sqrt(float(np.max(self._divfac_sq * absq)))
        max_u = math.sqrt(float(np.max(self._maxM_sq * absq)))
        return max_div, max_u

    def linear_symbol_cube(self, params: ModelParams) -> np.ndarray:
        out = params.omega_prime * self.M3 + params.eps_hyper * self.ksq
        if params.eps_kappa:
            frac = np.zeros_like(self.ksq)
            nz = self.ksq > 0
            frac[nz] = self.ksq[nz] ** params.gamma
            out = out + params.eps_kappa * frac
        return out

    def _require_dealiased(self):
        if not self.grid.dealiased:
            raise PadTooSmallError(
                f"grid pad {self.grid.pad} < 3/2: quadratic products would alias")

    def nonlinear(self, coeffs: np.ndarray, want_stats: bool = True):
        """-P[u . grad theta] with u = M[theta], alias-free.

        Returns (cube, stats).  The relative measurements in stats are
        normalized by the magnitude scale of the bilinear term before any
        cancellation, scale = ||u||_{L2} ||grad theta||_{L2}, so they stay
        meaningful (and tiny) when the term itself collapses to rounding
        noise on line-supported data:

          nonlinear_rel      = ||N||_{L2} / scale
          pairing_rel        = |Re <theta, N>| / (||theta||_{L2} scale)
          projected_mass_rel = (removed {k3=0} tendency energy)^(1/2) / ||theta||_{L2}
        """
        self._require_dealiased()
        th_half = self._half(coeffs)
        phys = self.to_phys_batch([th_half] + [mh * th_half for mh in self._Mh])
        flux = self.from_phys_batch(phys[1:] * phys[0])
        n_half = -(self._ik1h * flux[0] + self._ik2h * flux[1] + self._ik3h * flux[2])

        stats = None
        with np.errstate(over="ignore"):
            removed = float(np.sum(np.abs(n_half[:, :, 0]) ** 2))
        n_half[:, :, 0] = 0.0
        if want_stats:
            # pairing and norms over the full cube, evaluated on the half
            # spectrum: the k3 = 0 plane is zero, other modes appear twice.
            # errstate: a non-finite state must still yield a report (the
            # integrator aborts on it right after this call).
            with np.errstate(invalid="ignore", over="ignore"):
                pair = 2.0 * float(np.real(np.sum(np.conj(th_half[:, :, 1:])
                                                  * n_half[:, :, 1:])))
                n_energy = 2.0 * float(np.sum(np.abs(n_half[:, :, 1:]) ** 2))
                absq = np.abs(coeffs) ** 2
                theta_l2 = math.sqrt(float(np.sum(absq)))
                u_l2 = math.sqrt(float(np.sum(self.Msq_sum * absq)))
                grad_l2 = math.sqrt(float(np.sum(self.ksq * absq)))
            scale = u_l2 * grad_l2
            stats = {
                "projected_mass_rel": math.sqrt(removed) / theta_l2 if theta_l2 > 0 else 0.0,
                "nonlinear_rel": math.sqrt(n_energy) / scale if scale > 0 else 0.0,
                "pairing_rel": abs(pair) / (theta_l2 * scale) if theta_l2 * scale > 0 else 0.0,
                "nonlinear_l2": math.sqrt(n_energy),
                "theta_l2": theta_l2,
            }
        return self._full_from_half(n_half), stats

    def advect_with_drift(self, v_phys, coeffs: np.ndarray) -> np.ndarray:
        """(v . grad theta)^ for a given physical drift, projected like the
        self-consistent term (no leading minus sign)."""
        self._require_dealiased()
        theta_phys = self.to_phys(self._half(coeffs))
        flux = self.from_phys_batch(np.asarray(v_phys) * theta_phys)
        a_half = self._ik1h * flux[0] + self._ik2h * flux[1] + self._ik3h * flux[2]
        a_half[:, :, 0] = 0.0
        return self._full_from_half(a_half)

    def drift_phys(self, coeffs: np.ndarray) -> np.ndarray:
        """Physical-space velocity samples of M[theta] on the padded grid,
        stacked as (3, M, M, M)."""
        th_half = self._half(coeffs)
        return self.to_phys_batch([mh * th_half for mh in self._Mh])


def get_operators(grid: GridSpec) -> SpectralOperators:
    key = (grid.N, grid.pad)
    ops = _OPS_CACHE.get(key)
    if ops is None:
        ops = SpectralOperators(grid)
        _OPS_CACHE[key] = ops
    return ops


def velocity(theta):
    """u_j = M_j[theta].  SpectralField -> tuple of 3 SpectralFields (the
    components are not zero-vertical-mean scalars, so they are returned as
    raw fields of the same cube); LineField -> tuple of 3 LineFields scaled
    by the constant symbol values on the line."""
    if isinstance(theta, SpectralField):
        ops = get_operators(theta.grid)
        return tuple(SpectralField(grid=theta.grid, coeffs=c)
                     for c in ops.velocity_cubes(theta.coeffs))
    if isinstance(theta, LineField):
        consts = symbols.line_constants(theta.line)
        return tuple(LineField(line=theta.line, coeffs=m * theta.coeffs)
                     for m in consts.components)
    raise TypeError(f"unsupported field type {type(theta)!r}")


def magnetic(theta: SpectralField):
    """b_j = (-Delta)^{-1} d_2 M_j[theta] as three spectral components."""
    ops = get_operators(theta.grid)
    return tuple(SpectralField(grid=theta.grid, coeffs=c)
                 for c in ops.magnetic_cubes(theta.coeffs))


def nonlinear_term(theta: SpectralField, return_stats: bool = False):
    """-P[u . grad theta], dealiased; P projects onto the Hermitian,
    zero-vertical-mean subspace."""
    ops = get_operators(theta.grid)
    cube, stats = ops.nonlinear(theta.coeffs)
    out = SpectralField(grid=theta.grid, coeffs=cube)
    return (out, stats) if return_stats else out


def rhs(theta: SpectralField, params: ModelParams, return_stats: bool = False):
    """Full tendency -u . grad theta - sigma theta of the perturbed system."""
    ops = get_operators(theta.grid)
    cube, stats = ops.nonlinear(theta.coeffs)
    cube = cube - ops.linear_symbol_cube(params) * theta.coeffs
    out = SpectralField(grid=theta.grid, coeffs=cube)
    return (out, stats) if return_stats else out
