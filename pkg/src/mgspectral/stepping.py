"""Semigroup propagation, integrating-factor time stepping, Picard schemes.

The linear part of the dynamics is diagonal in Fourier space with symbol
sigma(k) >= 0, so the solution operator S(t) = e^{-sigma t} is exact and
norm non-increasing.  The nonlinear problem is integrated with a classical
4-stage integrating-factor Runge-Kutta step in the semigroup-weighted
variable; when the advection term vanishes (line-supported data) the step
reduces to the exact semigroup.

The two Picard schemes of the local-existence theory are realized as
Duhamel fixed-point sweeps on a uniform time grid:

    theta_1(t)     = S(t) theta_0
    theta_{n+1}(t) = S(t) theta_0 - int_0^t S(t - tau) (w_n . grad theta_n)(tau) dtau

with frozen drift w_n = v (the regularized linear problem: difference
functionals contract for horizons below eps / (2 C_s ||v||_{H^s}^2)) or
self-consistent drift w_n = M[theta_n].  The Duhamel integral uses the
midpoint rule at the sweep step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from . import dynamics, symbols
from .dynamics import ModelParams, get_operators
from .errors import MissingConstantsError, NoConvergenceError, NonFiniteError
from .fields import (
    GridSpec,
    LineField,
    SpectralField,
    _sobolev_weights,
    line_mask,
    sobolev_norm,
)
from .lattice import LineSpec


def semigroup_apply(f, dt: float, params: ModelParams):
    """theta_hat(k) <- e^{-sigma(k) dt} theta_hat(k); exact linear solution."""
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if isinstance(f, SpectralField):
        ops = get_operators(f.grid)
        factor = np.exp(-ops.linear_symbol_cube(params) * dt)
        return SpectralField(grid=f.grid, coeffs=f.coeffs * factor)
    if isinstance(f, LineField):
        sig = dynamics.line_symbol_values(f.line, f.N_L, params)
        return LineField(line=f.line, coeffs=f.coeffs * np.exp(-sig * dt))
    raise TypeError(f"unsupported field type {type(f)!r}")


class IFRK4:
    """Integrating-factor RK4 on d/dt theta_hat = -sigma theta_hat + N(theta).

    Semigroup factors are cached for the fixed step size; with N identically
    zero the update collapses to theta <- E theta, the exact semigroup."""

    def __init__(self, grid: GridSpec, params: ModelParams, dt: float):
        if dt <= 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        self.ops = get_operators(grid)
        self.params = params
        self.dt = dt
        sigma = self.ops.linear_symbol_cube(params)
        self.E = np.exp(-sigma * dt)
        self.Eh = np.exp(-sigma * (dt / 2.0))

    def step(self, coeffs: np.ndarray):
        """One step; returns (new coeffs, stats of the N evaluation at the
        step's start state)."""
        dt, E, Eh = self.dt, self.E, self.Eh
        n = self.ops.nonlinear
        a, stats = n(coeffs)
        b, _ = n(Eh * (coeffs + (dt / 2.0) * a), want_stats=False)
        c, _ = n(Eh * coeffs + (dt / 2.0) * b, want_stats=False)
        d, _ = n(E * coeffs + dt * (Eh * c), want_stats=False)
        out = E * coeffs + (dt / 6.0) * (E * a + 2.0 * Eh * (b + c) + d)
        return out, stats


def step_if_rk4(f: SpectralField, dt: float, params: ModelParams) -> SpectralField:
    """One integrating-factor RK4 step."""
    out, _ = IFRK4(f.grid, params, dt).step(f.coeffs)
    return SpectralField(grid=f.grid, coeffs=out)


# -- trajectory integration ---------------------------------------------------

@dataclass
class StepStats:
    t: float
    nonlinear_rel: float
    pairing_rel: float
    projected_mass_rel: float


@dataclass
class Trajectory:
    scheme: str
    params: ModelParams
    line: LineSpec | None
    grid: GridSpec | None
    records: list = field(default_factory=list)
    step_stats: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)   # (t, SpectralField | LineField)
    orders: list = field(default_factory=list)

    def max_step_stat(self, name: str) -> float:
        if not self.step_stats:
            return 0.0
        return max(getattr(s, name) for s in self.step_stats)


def _steps_for(t_end: float, dt: float):
    """Uniform grid hitting t_end exactly."""
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    if t_end == 0:
        return 0, 0.0
    n = max(1, int(round(t_end / dt)))
    return n, t_end / n


def integrate_exact_line(theta0: LineField, params: ModelParams, t_end: float,
                         dt: float, record_every: int, orders) -> Trajectory:
    """Closed-form trajectory for line-supported data.

    On a line the advection term vanishes identically (the divergence
    identity of the symbols kills u . grad theta), so the nonlinear solution
    is the pure semigroup; records are sampled at the cadence a stepped
    scheme would use."""
    theta0.line.require_admissible()
    m3 = symbols.line_constants(theta0.line).components[2]
    traj = Trajectory(scheme="exact_line", params=params, line=theta0.line,
                      grid=None, orders=list(orders))
    sig = dynamics.line_symbol_values(theta0.line, theta0.N_L, params)
    n_steps, dt_eff = _steps_for(t_end, dt)
    n = theta0.modes().astype(np.float64)
    ksq = n * n * float(theta0.line.p_norm_sq)
    absq0 = np.abs(theta0.coeffs) ** 2
    e0 = float(np.sum(absq0))
    for j in range(n_steps + 1):
        t = j * dt_eff
        if j % record_every and j != n_steps:
            continue
        decay = np.exp(-sig * t)
        absq = absq0 * decay ** 2
        total = float(np.sum(absq))
        hs = {s: math.sqrt(float(np.sum((1.0 + ksq) ** s * absq))) for s in orders}
        sq_energy = float(np.sum(m3 * absq))
        # the dissipation integral is analytic mode by mode:
        # int_0^t m3 |c_n|^2 e^{-2 sig_n tau} dtau = m3 |c_n|^2 (1 - e^{-2 sig_n t}) / (2 sig_n)
        with np.errstate(invalid="ignore", divide="ignore"):
            per_mode = np.where(sig > 0, (1.0 - decay ** 2) / (2.0 * sig), t)
        diss = float(np.sum(m3 * absq0 * per_mode))
        residual = abs(total - e0 + 2.0 * diss) / e0 if (e0 > 0 and j > 0) else 0.0
        traj.records.append(diag.DiagnosticsRecord(
            t=t, l2=math.sqrt(total), hs=hs, sqrtM3_energy=sq_energy,
            energy_residual=residual, leakage=0.0, max_divergence=0.0,
            projected_mass=0.0))
    traj.snapshots.append((0.0, theta0.copy()))
    if n_steps:
        traj.snapshots.append(
            (t_end, LineField(line=theta0.line,
                              coeffs=theta0.coeffs * np.exp(-sig * t_end))))
    return traj


def integrate_if_rk4(theta0: SpectralField, params: ModelParams, t_end: float,
                     dt: float, record_every: int, orders,
                     line: LineSpec | None = None) -> Trajectory:
    """Fixed-step integrating-factor RK4 trajectory with per-record diagnostics.

    Raises NonFiniteError carrying the first bad time if the state stops
    being finite (the expected outcome of deliberately ill-posed generic
    runs at large amplitude)."""
    grid = theta0.grid
    ops = get_operators(grid)
    traj = Trajectory(scheme="if_rk4", params=params, line=line, grid=grid,
                      orders=list(orders))
    off_msk = ~line_mask(grid, line) if line is not None else None
    n_steps, dt_eff = _steps_for(t_end, dt)
    coeffs = theta0.coeffs.copy()
    e0 = float(np.sum(np.abs(coeffs) ** 2))
    diss_acc = 0.0
    prev = None

    def push_record(t, proj_mass):
        nonlocal diss_acc, prev
        absq = np.abs(coeffs) ** 2
        total = float(np.sum(absq))
        sq_energy = float(np.sum(ops.M3 * absq))
        if prev is not None:
            diss_acc += 0.5 * (prev[1] + sq_energy) * (t - prev[0])
        hs = {}
        for s in orders:
            w = _sobolev_weights(ops.N, s, homogeneous=False)
            hs[s] = math.sqrt(float(np.sum(w * absq)))
        max_div, max_u = ops.divergence_stats_from_energy(absq)
        if off_msk is not None and total > 0:
            # sum the off-line energy directly; total minus on-line would
            # lose it to cancellation at the rounding level we care about
            leakage = math.sqrt(float(np.sum(absq[off_msk])) / total)
        else:
            leakage = 0.0
        residual = abs(total - e0 + 2.0 * diss_acc) / e0 if (e0 > 0 and prev) else 0.0
        traj.records.append(diag.DiagnosticsRecord(
            t=t, l2=math.sqrt(total), hs=hs, sqrtM3_energy=sq_energy,
            energy_residual=residual, leakage=leakage,
            max_divergence=max_div / max_u if max_u > 0 else 0.0,
            projected_mass=proj_mass))
        prev = (t, sq_energy)

    push_record(0.0, 0.0)
    traj.snapshots.append((0.0, theta0.copy()))
    if n_steps == 0:
        return traj

    stepper = IFRK4(grid, params, dt_eff)
    proj_acc = 0.0
    for j in range(1, n_steps + 1):
        coeffs, stats = stepper.step(coeffs)
        t = j * dt_eff
        total = float(np.sum(np.abs(coeffs) ** 2))
        if not np.isfinite(total):
            raise NonFiniteError(f"state became non-finite at t={t:g}", blow_up_time=t)
        traj.step_stats.append(StepStats(
            t=t, nonlinear_rel=stats["nonlinear_rel"],
            pairing_rel=stats["pairing_rel"],
            projected_mass_rel=stats["projected_mass_rel"]))
        proj_acc = max(proj_acc, stats["projected_mass_rel"])
        if j % record_every == 0 or j == n_steps:
            push_record(t, proj_acc)
            proj_acc = 0.0
    traj.snapshots.append((t_end, SpectralField(grid=grid, coeffs=coeffs.copy())))
    return traj


# -- Picard schemes -----------------------------------------------------------

@dataclass
class PicardResult:
    mode: str
    eps: float
    s: float
    T_star: float
    dt: float
    n_steps: int
    r_tilde: list          # difference functionals R~_n, n = 1 .. n_max - 1
    ratios: list           # R~_n / R~_{n-1}, n = 2 .. n_max - 1
    converged_at: int | None
    final_iterates: list   # SpectralField at t = T_star per iterate
    fixed_point: bool = False


def picard_solve(theta0: SpectralField, velocity_source: str = "frozen",
                 drift=None, eps: float = 0.1, T_star: float = 0.1,
                 n_max: int = 6, dt: float = 0.01, s: float = 2.51,
                 raise_on_divergence: bool = True) -> PicardResult:
    """Duhamel fixed-point sweep of the regularized iteration.

    velocity_source selects the frozen-drift scheme (drift defaults to
    M[theta_0], held fixed across iterations and time) or the
    self-consistent scheme (drift recomputed from the previous iterate at
    every node).  The difference functional

        R~_n = sup_t ||L^s d_n||^2 + int ||sqrt(M3) L^s d_n||^2 dt
                                   + eps int ||L^{s+1} d_n||^2 dt

    for d_n = theta_{n+1} - theta_n is reported per iteration together with
    the successive ratios; three consecutive ratios above 1 raise
    NoConvergence (or flag the result when raise_on_divergence is false).
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    grid = theta0.grid
    ops = get_operators(grid)
    params = ModelParams(eps_hyper=eps)
    n_steps, dt_eff = _steps_for(T_star, dt)
    if n_steps == 0:
        raise ValueError("picard horizon must be positive")

    sigma = ops.linear_symbol_cube(params)
    S_dt = np.exp(-sigma * dt_eff)
    S_half = np.exp(-sigma * (dt_eff / 2.0))

    # homogeneous Sobolev weights for the difference functional
    w_s = _sobolev_weights(grid.N, s, homogeneous=True)
    w_s1 = _sobolev_weights(grid.N, s + 1.0, homogeneous=True)
    m3 = ops.M3

    theta0_scale = sobolev_norm(theta0, s, homogeneous=True)
    tiny = (1e-13 * (theta0_scale + 1e-300)) ** 2

    def functional(diff_traj):
        sup = 0.0
        diss = np.zeros(n_steps + 1)
        hyper = np.zeros(n_steps + 1)
        for j, d in enumerate(diff_traj):
            absq = np.abs(d) ** 2
            sup = max(sup, float(np.sum(w_s * absq)))
            diss[j] = float(np.sum(m3 * w_s * absq))
            hyper[j] = float(np.sum(w_s1 * absq))
        tgrid = np.arange(n_steps + 1) * dt_eff
        return sup + float(np.trapezoid(diss, tgrid)) + eps * float(np.trapezoid(hyper, tgrid))

    frozen = velocity_source == "frozen"
    if velocity_source not in ("frozen", "self_consistent"):
        raise ValueError(f"unknown velocity source {velocity_source!r}")
    if frozen:
        v_phys = drift if drift is not None else ops.drift_phys(theta0.coeffs)

    # iterate trajectories on the sweep grid; theta_1 is the drift-free
    # semigroup solution (entries of lin_traj are shared read-only)
    lin_traj = [theta0.coeffs * np.exp(-sigma * (j * dt_eff)) for j in range(n_steps + 1)]
    prev = lin_traj
    finals = [SpectralField(grid=grid, coeffs=prev[-1].copy())]
    r_tilde = []
    ratios = []
    converged_at = None
    bad_streak = 0

    for n in range(2, n_max + 1):
        if frozen:
            forcing = [ops.advect_with_drift(v_phys, th) for th in prev]
        else:
            forcing = [ops.advect_with_drift(ops.drift_phys(th), th) for th in prev]
        curr = [theta0.coeffs.copy()]
        integral = np.zeros_like(theta0.coeffs)
        for j in range(1, n_steps + 1):
            # midpoint rule on [t_{j-1}, t_j]: S(dt/2) applied to the
            # interpolated forcing, accumulated through the semigroup
            mid = 0.5 * (forcing[j - 1] + forcing[j])
            integral = S_dt * integral + dt_eff * (S_half * mid)
            curr.append(lin_traj[j] - integral)
        diff = [c - p for c, p in zip(curr, prev)]
        r = functional(diff)
        r_tilde.append(r)
        if len(r_tilde) >= 2:
            prev_r = r_tilde[-2]
            if prev_r <= tiny:
                ratios.append(0.0)
            else:
                ratios.append(r / prev_r)
            if ratios[-1] > 1.0:
                bad_streak += 1
                if bad_streak >= 3 and raise_on_divergence:
                    raise NoConvergenceError(
                        "difference ratios exceeded 1 for 3 consecutive iterations",
                        ratios=ratios)
            else:
                bad_streak = 0
        if r <= tiny and converged_at is None:
            converged_at = n
        finals.append(SpectralField(grid=grid, coeffs=curr[-1].copy()))
        prev = curr

    return PicardResult(
        mode=velocity_source, eps=eps, s=s, T_star=n_steps * dt_eff, dt=dt_eff,
        n_steps=n_steps, r_tilde=r_tilde, ratios=ratios,
        converged_at=converged_at, final_iterates=finals,
        fixed_point=theta0_scale == 0.0)


def epsilon_sweep(theta0: SpectralField, eps_list, T: float, dt: float,
                  n_max: int = 6, s: float = 2.51, velocity_source: str = "frozen"):
    """Vanishing-regularization sweep mirroring the compactness step.

    Runs the Picard iteration at each eps over a common horizon and measures
    the H^{s-1} distance between the final iterates of consecutive eps
    values.  The distances are reported, not asserted: the limit itself is a
    statement of the theory, not of this discretization.

    Returns a list of dicts {eps, hs_final, diff_prev} ordered like eps_list.
    """
    w = _sobolev_weights(theta0.grid.N, s - 1.0, homogeneous=False)
    results = []
    prev_final = None
    for eps in eps_list:
        res = picard_solve(theta0, velocity_source, eps=eps, T_star=T,
                           n_max=n_max, dt=dt, s=s, raise_on_divergence=False)
        final = res.final_iterates[-1].coeffs
        entry = {"eps": float(eps),
                 "hs_final": math.sqrt(float(np.sum(w * np.abs(final) ** 2))),
                 "diff_prev": None}
        if prev_final is not None:
            entry["diff_prev"] = math.sqrt(float(np.sum(w * np.abs(final - prev_final) ** 2)))
        prev_final = final
        results.append(entry)
    return results


# -- explicit constants of the local/global theory ----------------------------

@dataclass
class TheoreticalTimes:
    T_star_eps: float
    T_local: float
    T_combined: float
    epsilon0: float
    m_lower: float
    m_upper: float
    drift_norm: float
    theta0_norm: float


def theoretical_times(theta0, line: LineSpec, *, eps: float, s: float = 2.51,
                      alpha: float | None = None, C_s: float | None = None,
                      C_alpha: float | None = None, C_kappa: float | None = None,
                      drift_norm: float | None = None) -> TheoreticalTimes:
    """Explicit horizon and smallness constants.

        T_star_eps = eps / (2 C_s ||v||_{H^s}^2)
        T_local    = log 2 / ((C_s m^* / sqrt(m_*)) ||L^s theta_0||)^2
        T_combined = min{log 2, 1/6} / (same denominator)
        epsilon_0  = min{(1 - alpha) / (16 C_alpha), log sqrt(2) / C_kappa}
                     * m_* / m^*

    with m_*, m^* the constants of the active line.  The generic analysis
    constants are never given values by the theory; they must be supplied.
    """
    missing = [name for name, v in
               [("C_s", C_s), ("C_alpha", C_alpha), ("C_kappa", C_kappa), ("alpha", alpha)]
               if v is None]
    if missing:
        raise MissingConstantsError(f"analysis constants unset: {', '.join(missing)}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    consts = symbols.line_constants(line)
    m_lo, m_up = consts.m_lower, consts.m_upper

    if drift_norm is None:
        v = dynamics.velocity(theta0)
        drift_norm = math.sqrt(sum(sobolev_norm(c, s) ** 2 for c in v))
    theta0_norm = sobolev_norm(theta0, s, homogeneous=True)

    T_star = eps / (2.0 * C_s * drift_norm ** 2) if drift_norm > 0 else math.inf
    denom = (C_s * m_up / math.sqrt(m_lo) * theta0_norm) ** 2
    T_local = math.log(2.0) / denom if denom > 0 else math.inf
    T_comb = min(math.log(2.0), 1.0 / 6.0) / denom if denom > 0 else math.inf
    eps0 = min((1.0 - alpha) / (16.0 * C_alpha),
               math.log(math.sqrt(2.0)) / C_kappa) * (m_lo / m_up)
    return TheoreticalTimes(
        T_star_eps=T_star, T_local=T_local, T_combined=T_comb, epsilon0=eps0,
        m_lower=m_lo, m_upper=m_up, drift_norm=drift_norm, theta0_norm=theta0_norm)
