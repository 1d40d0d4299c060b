"""mgplot: render figures from an mgspectral run directory.

Usage:

    mgplot RUN_DIR [--formats png,svg] [--out DIR]

Writes decay curves (one per recorded Sobolev order, with the theoretical
rate overlay and the fitted slope annotated), symbol-slice heatmaps for every
k3 plane present in symbols.csv, a leakage/defect plot, and a contraction
plot for picard runs.  A fit_annotations.json file records every number
drawn on a figure.  Inputs are never modified.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


from .bundle import BundleError, MissingColumnError, load_bundle
from .figures import plot_decay, plot_leakage, plot_picard_ratios, plot_symbol_slice


def render(run_dir, out_dir=None, formats=("png",)) -> dict:
    """Render all applicable figures; returns {figure stem: annotation}."""
    bundle = load_bundle(run_dir)
    out = Path(out_dir) if out_dir else bundle.path / "plots"
    out.mkdir(parents=True, exist_ok=True)
    annotations = {}
    written = []

    if bundle.table:
        for s in bundle.orders:
            paths, rate = plot_decay(bundle, s, out, formats)
            written += paths
            annotations[f"decay_hs_{s:g}"] = {"fitted_rate": rate,
                                              "reference_rate": bundle.reference_rate}
        written += plot_leakage(bundle, out, formats)

    if bundle.symbols is not None:
        for k3 in sorted(set(int(v) for v in bundle.symbols["k3"])):
            written += plot_symbol_slice(bundle, k3, out, formats)

    if bundle.picard is not None:
        written += plot_picard_ratios(bundle, out, formats)

    if not written:
        raise BundleError(f"{run_dir}: nothing to plot")
    with open(out / "fit_annotations.json", "w") as fh:
        json.dump(annotations, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"out_dir": str(out), "figures": [str(p) for p in written],
            "annotations": annotations}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mgplot", description=__doc__)
    parser.add_argument("run_dir", help="mgspectral run directory")
    parser.add_argument("--formats", default="png",
                        help="comma-separated image formats (png, svg, pdf)")
    parser.add_argument("--out", default=None,
                        help="output directory (default RUN_DIR/plots)")
    args = parser.parse_args(argv)
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    try:
        result = render(args.run_dir, args.out, formats)
    except (BundleError, MissingColumnError, ValueError, OSError) as exc:
        print(f"mgplot: {exc}", file=sys.stderr)
        return 1
    for fig in result["figures"]:
        print(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
