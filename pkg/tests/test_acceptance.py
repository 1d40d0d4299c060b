"""Acceptance suite: one test per primary criterion, at the stated tolerances.

Each test prints a single [PASS]/[FAIL] line (visible with pytest -s or in
captured output).  Criteria tied to a packaged preset run the real CLI entry
point in-process and read back the artifacts it wrote.
"""

import json
import time

import numpy as np
import pytest

from oracles import brute_nonlinear

import mgspectral as mg
from mgspectral.cli import main
from mgspectral.diagnostics import hs_value, read_diagnostics_csv
from mgspectral.lattice import ConeSpec, canonicalize_line, sample_cone_directions
from mgspectral.symbols import cone_bounds, k1_sweep, line_constants


class Criterion:
    """Timing + one-line reporting wrapper."""

    def __init__(self, name, budget_s):
        self.name = name
        self.budget_s = budget_s

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = exc_type is None and elapsed < self.budget_s
        print(f"[{'PASS' if ok else 'FAIL'}] {self.name} "
              f"({elapsed:.1f}s / budget {self.budget_s:.0f}s)")
        if exc_type is None:
            assert elapsed < self.budget_s, (
                f"{self.name}: runtime {elapsed:.1f}s exceeds {self.budget_s}s")
        return False


def run_preset(tmp_path, command, preset, sub="run"):
    out = tmp_path / sub
    rc = main([command, "--preset", preset, "--out", str(out)])
    rundir = out / preset
    summary = json.loads((rundir / "summary.json").read_text())
    return rc, rundir, summary


def test_symbol_identities():
    with Criterion("symbol identities on |k_i| <= 32", 10.0):
        N = 32
        k = np.arange(-N, N + 1, dtype=np.int64)
        k1, k2, k3 = np.meshgrid(k, k, k, indexing="ij")
        ksq = k1 * k1 + k2 * k2 + k3 * k3
        den = k3 * k3 * ksq + k2 ** 4
        n1 = k2 * k3 * ksq - k1 * k2 * k2 * k3
        n2 = -k1 * k3 * ksq - k2 ** 3 * k3
        n3 = k2 * k2 * (k1 * k1 + k2 * k2)
        # divergence identity, exact in integer arithmetic
        assert np.all(k1 * n1 + k2 * n2 + k3 * n3 == 0)
        # evenness: numerators and denominator invariant under k -> -k
        rev = (slice(None, None, -1),) * 3
        for arr in (n1, n2, n3, den):
            assert np.array_equal(arr, arr[rev])
        # degree-0 homogeneity, exact by cross-multiplication of integers
        for n in range(2, N + 1):
            m = N // n
            if m == 0:
                break
            small = slice(N - m, N + m + 1)
            big = slice(N - n * m, N + n * m + 1, n)
            for num in (n1, n2, n3):
                assert np.array_equal(
                    num[small, small, small] * den[big, big, big],
                    num[big, big, big] * den[small, small, small])
        # float tables within 1e-13 of the rational values
        from mgspectral.symbols import multiplier_cube
        m1, m2, m3, _, _ = multiplier_cube(N)
        mask = k3 != 0
        denf = den.astype(np.float64)
        for num, mf in ((n1, m1), (n2, m2), (n3, m3)):
            exact = np.zeros_like(denf)
            exact[mask] = num[mask].astype(np.float64) / denf[mask]
            err = np.abs(mf - exact)
            assert np.all(err <= 1e-13 * np.maximum(1.0, np.abs(exact)))


def test_asymptotic_exponents():
    with Criterion("asymptotic exponents at r = 1/2", 5.0):
        fit = mg.asymptotic_probe(0.5, k1_sweep(64, 4096))
        for got, want in zip(fit.slopes, (0.5, 1.0, 1.0)):
            assert got == pytest.approx(want, abs=0.05), fit.slopes


def test_cone_sandwich():
    with Criterion("cone sandwich for 200 sampled lines in K_1", 5.0):
        cone = ConeSpec(1)
        bounds = cone_bounds(cone)
        assert (bounds.m_lower, bounds.m_upper) == (0.25, 4.0)
        qs = sample_cone_directions(cone, 200, seed=17)
        assert len(qs) == 200
        for q in qs:
            c = line_constants(canonicalize_line(q))
            assert 0.25 <= c.m_lower <= c.m_upper <= 4.0


def test_line_triviality_and_exact_decay(tmp_path):
    with Criterion("line triviality + exact decay on p=(1,1,1)", 30.0):
        rc, rundir, summary = run_preset(tmp_path, "line-run", "line-decay-111")
        assert rc == 0
        assert summary["step_maxima"]["nonlinear_rel"] <= 1e-12
        for s in ("0", "2.51", "4.51"):
            assert summary["decay_fits"][s]["rate"] == pytest.approx(-0.5, abs=1e-3)
        records, orders = read_diagnostics_csv(rundir / "diagnostics.csv")
        for s in orders:
            h0 = hs_value(records[0], s)
            for r in records:
                assert hs_value(r, s) <= h0 * (1 + 1e-12)


def test_energy_law_full_run(tmp_path):
    with Criterion("energy law on generic 32^3 data", 300.0):
        rc, rundir, summary = run_preset(tmp_path, "full-run", "full-energy-32")
        assert rc == 0
        records, _ = read_diagnostics_csv(rundir / "diagnostics.csv")
        from mgspectral.diagnostics import energy_law_residual
        assert energy_law_residual(records) <= 1e-6
        assert max(r.energy_residual for r in records) <= 1e-6
        assert summary["step_maxima"]["pairing_rel"] <= 1e-12


def test_support_preservation(tmp_path):
    with Criterion("support preservation at 32^3", 300.0):
        rc, rundir, summary = run_preset(tmp_path, "full-run", "support-32")
        assert rc == 0
        records, _ = read_diagnostics_csv(rundir / "diagnostics.csv")
        assert records[-1].t == pytest.approx(1.0)
        assert all(r.leakage <= 1e-10 for r in records)


def test_bruteforce_oracle_equivalence():
    with Criterion("pseudo-spectral vs direct convolution at N = 6", 30.0):
        grid = mg.GridSpec(N=6)
        for seed in range(20):
            f = mg.random_field(grid, beta=1.0, amplitude=1.0, seed=100 + seed)
            expect = brute_nonlinear(f)
            got = mg.nonlinear_term(f)
            scale = np.max(np.abs(expect))
            assert scale > 0
            assert np.max(np.abs(got.coeffs - expect)) <= 1e-12 * scale


def test_picard_contraction(tmp_path):
    with Criterion("picard contraction, frozen drift, eps = 0.1", 120.0):
        rc, rundir, summary = run_preset(tmp_path, "picard", "picard-16")
        assert rc == 0
        assert summary["eps"] == 0.1
        ratios = summary["ratios"]
        assert len(ratios) == 5  # n = 2 .. 6
        assert all(r <= 0.55 for r in ratios)


def test_bootstrap_bounds(tmp_path):
    with Criterion("bootstrap bounds at epsilon_0", 30.0):
        rc, rundir, summary = run_preset(tmp_path, "line-run", "bootstrap-line")
        assert rc == 0
        boot = summary["bootstrap"]
        # epsilon_0(alpha=1/2, C_alpha=C_kappa=1) on p=(1,1,1): 1/32 * 1/2
        assert boot["epsilon"] == pytest.approx(0.015625, rel=1e-12)
        assert boot["h52_bound_ok"] and boot["hkappa_bound_ok"]
        assert boot["h52_min_margin"] > 0
        assert boot["hkappa_min_margin"] > 0


def test_determinism(tmp_path):
    with Criterion("byte-identical CSVs across repeated preset runs", 120.0):
        rc1, dir1, _ = run_preset(tmp_path, "line-run", "line-decay-011", sub="a")
        rc2, dir2, _ = run_preset(tmp_path, "line-run", "line-decay-011", sub="b")
        assert rc1 == 0 and rc2 == 0
        for name in ("diagnostics.csv", "symbols.csv"):
            assert (dir1 / name).read_bytes() == (dir2 / name).read_bytes(), name
