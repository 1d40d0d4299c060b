"""Figure generation for mgspectral run directories."""

__version__ = "0.1.0"

from .bundle import BundleError, MissingColumnError, ReportBundle, fit_decay_rate, load_bundle
from .cli import render
from .figures import plot_decay, plot_leakage, plot_picard_ratios, plot_symbol_slice

__all__ = [name for name in dir() if not name.startswith("_")]
