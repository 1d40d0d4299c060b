"""Publication-style figures from a run bundle.

Output filenames are deterministic functions of the inputs (one decay figure
per Sobolev order, one heatmap per symbol slice), and every fitted number
drawn on a figure is also returned to the caller so it can be checked against
the run's summary.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

from .bundle import MissingColumnError, ReportBundle, fit_decay_rate


def _save(fig, out_dir: Path, stem: str, formats) -> list[Path]:
    paths = []
    for fmt in formats:
        path = out_dir / f"{stem}.{fmt}"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        paths.append(path)
    plt.close(fig)
    return paths


def plot_decay(bundle: ReportBundle, s: float, out_dir: Path,
               formats=("png",)) -> tuple[list[Path], float]:
    """Semilog decay curve of ||theta||_{H^s}(t) with the theoretical
    e^{-m* t} reference slope; returns (paths, fitted_rate)."""
    t = bundle.column("t")
    norms = bundle.hs_column(s)
    rate = fit_decay_rate(t, norms)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(t, norms, "o-", ms=2.5, lw=1, label=f"$\\|\\theta\\|_{{H^{{{s:g}}}}}$")
    ref = bundle.reference_rate
    if ref is not None:
        ax.semilogy(t, norms[0] * np.exp(-ref * t), "k--", lw=1,
                    label=f"reference $e^{{-{ref:g} t}}$")
    ax.annotate(f"fit slope = {rate:.6f}", xy=(0.04, 0.06), xycoords="axes fraction",
                fontsize=9, bbox=dict(boxstyle="round", fc="white", alpha=0.8))
    ax.set_xlabel("t")
    ax.set_ylabel(f"$H^{{{s:g}}}$ norm")
    ax.set_title(f"{bundle.path.name}: decay of the $H^{{{s:g}}}$ norm")
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, out_dir, f"decay_hs_{s:g}", formats), rate


def plot_symbol_slice(bundle: ReportBundle, k3: int, out_dir: Path,
                      formats=("png",)) -> list[Path]:
    """Heatmaps of |M_j| on the lattice plane k3 = const, log color scale."""
    if bundle.symbols is None:
        raise MissingColumnError(f"{bundle.path} has no symbols.csv")
    sym = bundle.symbols
    sel = sym["k3"] == k3
    if not np.any(sel):
        raise ValueError(f"symbols.csv has no rows with k3 = {k3}")
    k1 = sym["k1"][sel].astype(int)
    k2 = sym["k2"][sel].astype(int)
    n = int(k1.max())
    size = 2 * n + 1
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.8), constrained_layout=True)
    floor = 1e-16
    for j, ax in enumerate(axes, start=1):
        grid = np.zeros((size, size))
        grid[k1 + n, k2 + n] = np.abs(sym[f"M{j}"][sel])
        im = ax.imshow(np.log10(grid.T + floor), origin="lower",
                       extent=(-n, n, -n, n), cmap="magma")
        ax.set_title(f"$\\log_{{10}} |M_{j}|$ on $k_3 = {k3}$")
        ax.set_xlabel("$k_1$")
        ax.set_ylabel("$k_2$")
        fig.colorbar(im, ax=ax, shrink=0.85)
    return _save(fig, out_dir, f"symbols_k3_{k3}", formats)


def plot_leakage(bundle: ReportBundle, out_dir: Path, formats=("png",)) -> list[Path]:
    """Off-line energy fraction and removed vertical-mean mass over time."""
    t = bundle.column("t")
    fig, ax = plt.subplots(figsize=(6, 4))
    floor = 1e-20
    ax.semilogy(t, bundle.column("leakage") + floor, label="leakage")
    ax.semilogy(t, bundle.column("projected_mass") + floor, label="projected mass")
    ax.semilogy(t, bundle.column("max_div") + floor, label="max divergence")
    ax.set_xlabel("t")
    ax.set_ylabel("relative magnitude")
    ax.set_title(f"{bundle.path.name}: support and constraint defects")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, out_dir, "leakage", formats)


def plot_picard_ratios(bundle: ReportBundle, out_dir: Path,
                       formats=("png",)) -> list[Path]:
    """Contraction ratios per iteration against the 1/2 reference."""
    if bundle.picard is None:
        raise MissingColumnError(f"{bundle.path} has no picard_ratios.csv")
    n = bundle.picard["n"]
    ratio = bundle.picard["ratio"]
    ok = np.isfinite(ratio)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(n[ok], ratio[ok], "o-", label="measured ratio")
    ax.axhline(0.5, color="k", ls="--", lw=1, label="theoretical 1/2")
    ax.set_xlabel("iteration n")
    ax.set_ylabel(r"$\tilde{R}_n / \tilde{R}_{n-1}$")
    ax.set_title(f"{bundle.path.name}: contraction of successive differences")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, out_dir, "picard_ratios", formats)
