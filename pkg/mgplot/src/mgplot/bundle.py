"""Loading of mgspectral run directories.

A run directory ("bundle") contains, per the simulator's output contract:

    diagnostics.csv     t, l2, hs_<s>..., sqrtM3_energy, energy_residual,
                        leakage, max_div, projected_mass
    summary.json        norms, decay fits, check results, line constants
    symbols.csv         k1,k2,k3,M1,M2,M3,sqrtM3 (optional, slice dumps)
    picard_ratios.csv   n,r_tilde,ratio (picard runs only)

Nothing here mutates the inputs; all figures are derived artifacts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MissingColumnError(KeyError):
    """A required CSV column is absent from the bundle."""


class BundleError(RuntimeError):
    """Run directory does not follow the output contract."""


FIXED_COLUMNS = ("t", "l2", "sqrtM3_energy", "energy_residual",
                 "leakage", "max_div", "projected_mass")
SUPPORTED_SCHEMA = 1


@dataclass
class ReportBundle:
    path: Path
    table: dict                      # column name -> float array
    orders: list                     # Sobolev orders present as hs_<s>
    summary: dict
    symbols: dict | None = None      # column name -> array, if symbols.csv exists
    picard: dict | None = None       # columns of picard_ratios.csv

    def column(self, name: str) -> np.ndarray:
        if name not in self.table:
            raise MissingColumnError(f"{self.path}: diagnostics.csv lacks column {name!r}")
        return self.table[name]

    def hs_column(self, s: float) -> np.ndarray:
        for cand in self.orders:
            if abs(cand - s) < 1e-9:
                return self.table[f"hs_{cand:g}"]
        raise MissingColumnError(f"{self.path}: no hs column for s = {s}")

    @property
    def reference_rate(self):
        line = self.summary.get("line") or {}
        return line.get("m_lower")


def _read_csv_columns(path: Path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    if not rows:
        raise BundleError(f"{path} has no data rows")
    data = np.array([[float(v) for v in row] for row in rows])
    return {name: data[:, i] for i, name in enumerate(header)}


def load_bundle(run_dir) -> ReportBundle:
    run_dir = Path(run_dir)
    diag_path = run_dir / "diagnostics.csv"
    summary_path = run_dir / "summary.json"
    if not summary_path.exists():
        raise BundleError(f"{run_dir} has no summary.json; not a run directory?")
    summary = json.loads(summary_path.read_text())
    schema = summary.get("schema_version")
    if schema != SUPPORTED_SCHEMA:
        raise BundleError(f"{run_dir}: summary schema {schema} != {SUPPORTED_SCHEMA}")

    table = {}
    orders = []
    if diag_path.exists():
        table = _read_csv_columns(diag_path)
        missing = [c for c in FIXED_COLUMNS if c not in table]
        if missing:
            raise MissingColumnError(f"{diag_path} lacks columns {missing}")
        orders = sorted(float(name[3:]) for name in table if name.startswith("hs_"))

    symbols = None
    if (run_dir / "symbols.csv").exists():
        symbols = _read_csv_columns(run_dir / "symbols.csv")
        for c in ("k1", "k2", "k3", "M1", "M2", "M3", "sqrtM3"):
            if c not in symbols:
                raise MissingColumnError(f"symbols.csv lacks column {c!r}")

    picard = None
    if (run_dir / "picard_ratios.csv").exists():
        picard = _read_csv_columns(run_dir / "picard_ratios.csv")

    return ReportBundle(path=run_dir, table=table, orders=orders,
                        summary=summary, symbols=symbols, picard=picard)


def fit_decay_rate(t: np.ndarray, norms: np.ndarray, skip_fraction: float = 0.05):
    """Least-squares slope of log(norm) vs t, excluding the leading
    skip_fraction of samples (same convention the simulator uses)."""
    if np.any(norms <= 0):
        raise ValueError("decay fit needs positive norms")
    start = min(int(skip_fraction * len(t)), max(len(t) - 6, 0))
    coeff = np.polyfit(t[start:], np.log(norms[start:]), 1)
    return float(coeff[0])
