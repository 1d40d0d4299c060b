"""Quantitative checks of the energy law, decay rates and bootstrap bounds.

Everything here is pure post-processing over immutable per-record data.  The
reference facts being verified:

* energy law      d/dt ||theta||_{L2}^2 = -2 ||sqrt(M3) theta||_{L2}^2,
* linear decay    ||theta||_{H^s}(t) = ||theta_0||_{H^s} e^{-M3(p) t} on lines,
* bootstrap       ||theta||_{H^{5/2+d}} <= 2 eps e^{-m* t} and
                  ||theta||_{H^kappa} <= 2 eps, for data of size eps <= eps_0,
* H^s estimate    d/dt ||theta||_{H^s}^2 <= -2 m* (1 - (C m^*/m*)
                  ||theta||_{H^{5/2+d}}) ||theta||_{H^s}^2,

with m* / m^* the damping constants of the active line.  Decay fits exclude
the first 5% of records to avoid transient contamination.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateNormsError,
    InsufficientDataError,
    MissingOrdersError,
)

FIT_SKIP_FRACTION = 0.05


@dataclass
class DiagnosticsRecord:
    """Per-record norms and invariant measurements.

    leakage, max_divergence and projected_mass are stored as dimensionless
    relative quantities (fractions of the field's own scale), so thresholds
    in configs and reports apply directly.
    """

    t: float
    l2: float
    hs: dict = field(default_factory=dict)   # Sobolev order -> ||theta||_{H^s}
    sqrtM3_energy: float = 0.0               # ||sqrt(M3) theta||_{L2}^2
    energy_residual: float = 0.0             # running energy-law defect
    leakage: float = 0.0                     # off-line energy fraction, sqrt
    max_divergence: float = 0.0              # max|k.u_hat| / max|u_hat|
    projected_mass: float = 0.0              # removed {k3=0} tendency / ||theta||


@dataclass
class DecayFit:
    s: float
    rate: float
    r_squared: float
    reference_rate: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0 + 1e-12):
            raise ValueError(f"r_squared out of range: {self.r_squared}")


def hs_value(record: DiagnosticsRecord, s: float) -> float:
    for key, value in record.hs.items():
        if abs(key - s) < 1e-9:
            return value
    raise MissingOrdersError(f"record at t={record.t} lacks H^{s}")


def energy_law_residual(records) -> float:
    """|Delta ||theta||^2 + 2 int ||sqrt(M3) theta||^2 dt| / ||theta(t0)||^2
    over the record window, trapezoidal quadrature.  Depends only on the
    window contents, so it is invariant under time translation."""
    records = list(records)
    if len(records) < 2:
        raise InsufficientDataError("energy-law residual needs >= 2 records")
    t = np.array([r.t for r in records])
    e = np.array([r.l2 ** 2 for r in records])
    d = np.array([r.sqrtM3_energy for r in records])
    if e[0] == 0.0:
        return 0.0
    dissipated = np.trapezoid(d, t)
    return float(abs(e[-1] - e[0] + 2.0 * dissipated) / e[0])


def _fit_window(n: int) -> int:
    skip = int(FIT_SKIP_FRACTION * n)
    return min(skip, n - 6)


def decay_fit(records, s: float, reference_rate: float | None = None) -> DecayFit:
    """Least-squares slope of log ||theta||_{H^s} against t."""
    records = list(records)
    if len(records) < 6:
        raise InsufficientDataError(f"decay fit needs >= 6 records, got {len(records)}")
    norms = np.array([hs_value(r, s) for r in records])
    if np.any(norms <= 0.0):
        raise DegenerateNormsError(f"H^{s} norm vanishes inside the fit window")
    t = np.array([r.t for r in records])
    start = max(_fit_window(len(records)), 0)
    t, norms = t[start:], norms[start:]
    y = np.log(norms)
    coeff = np.polyfit(t, y, 1)
    rate = float(coeff[0])
    fitted = np.polyval(coeff, t)
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return DecayFit(s=float(s), rate=rate, r_squared=r2, reference_rate=reference_rate)


@dataclass
class BootstrapReport:
    h52_bound_ok: bool
    hkappa_bound_ok: bool
    h52_min_margin: float       # min over records of 2 eps e^{-m* t} - value
    hkappa_min_margin: float    # min over records of 2 eps - value
    s_low: float
    kappa: float
    epsilon: float
    m_star: float
    first_violation_t: float | None = None


def bootstrap_check(records, epsilon: float, alpha: float, m_star: float,
                    delta: float = 0.01) -> BootstrapReport:
    """Verify the two bootstrap inequalities at every record."""
    records = list(records)
    if not records:
        raise InsufficientDataError("bootstrap check needs records")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    s_low = 2.5 + delta
    kappa = 1.0 / alpha + 2.5 + delta
    h52_margin = math.inf
    hk_margin = math.inf
    first_bad = None
    for r in records:
        v52 = hs_value(r, s_low)
        vk = hs_value(r, kappa)
        m1 = 2.0 * epsilon * math.exp(-m_star * r.t) - v52
        m2 = 2.0 * epsilon - vk
        if (m1 < 0 or m2 < 0) and first_bad is None:
            first_bad = float(r.t)
        h52_margin = min(h52_margin, float(m1))
        hk_margin = min(hk_margin, float(m2))
    return BootstrapReport(
        h52_bound_ok=h52_margin >= 0.0,
        hkappa_bound_ok=hk_margin >= 0.0,
        h52_min_margin=h52_margin,
        hkappa_min_margin=hk_margin,
        s_low=s_low, kappa=kappa, epsilon=epsilon, m_star=m_star,
        first_violation_t=first_bad,
    )


def empirical_Cs(records, s: float, m_lower: float, m_upper: float,
                 delta: float = 0.01):
    """Smallest C >= 0 for which the H^s energy estimate holds at all records.

    Time derivatives are centered differences on the record grid.  On exact
    line trajectories the advection term vanishes and the result is 0.
    Returns (C, t_binding).
    """
    records = list(records)
    if len(records) < 3:
        raise InsufficientDataError("empirical constant needs >= 3 records")
    s_low = 2.5 + delta
    t = np.array([r.t for r in records])
    e = np.array([hs_value(r, s) ** 2 for r in records])
    h = np.array([hs_value(r, s_low) for r in records])
    best = 0.0
    t_at = t[0]
    for i in range(1, len(records) - 1):
        dedt = (e[i + 1] - e[i - 1]) / (t[i + 1] - t[i - 1])
        numer = dedt + 2.0 * m_lower * e[i]
        denom = 2.0 * m_upper * h[i] * e[i]
        if numer <= 0.0:
            continue
        if denom <= 0.0:
            continue
        c = numer / denom
        if c > best:
            best, t_at = c, t[i]
    return float(best), float(t_at)


# -- CSV schema ---------------------------------------------------------------

def _order_label(s: float) -> str:
    return f"hs_{s:g}"


def csv_header(orders) -> list[str]:
    head = ["t", "l2"]
    head += [_order_label(s) for s in orders]
    head += ["sqrtM3_energy", "energy_residual", "leakage", "max_div", "projected_mass"]
    return head


def write_diagnostics_csv(records, orders, path):
    """One row per record; floats are written with shortest round-trip repr,
    so identical trajectories produce byte-identical files."""
    orders = list(orders)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header(orders))
        for r in records:
            row = [repr(float(r.t)), repr(float(r.l2))]
            row += [repr(float(hs_value(r, s))) for s in orders]
            row += [repr(float(r.sqrtM3_energy)), repr(float(r.energy_residual)),
                    repr(float(r.leakage)), repr(float(r.max_divergence)),
                    repr(float(r.projected_mass))]
            w.writerow(row)


def read_diagnostics_csv(path):
    """Inverse of write_diagnostics_csv: (records, orders)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        orders = [float(name[3:]) for name in header if name.startswith("hs_")]
        records = []
        for row in reader:
            vals = dict(zip(header, (float(v) for v in row)))
            records.append(DiagnosticsRecord(
                t=vals["t"], l2=vals["l2"],
                hs={s: vals[_order_label(s)] for s in orders},
                sqrtM3_energy=vals["sqrtM3_energy"],
                energy_residual=vals["energy_residual"],
                leakage=vals["leakage"],
                max_divergence=vals["max_div"],
                projected_mass=vals["projected_mass"],
            ))
    return records, orders
