#!/usr/bin/env python3
"""Compare the torch and scipy FFT backends on the solver's transform sizes.

One IF-RK4 step costs 4 nonlinear evaluations, each a batch of 4 inverse and
3 forward real transforms on the padded grid, so the per-transform timings
below translate directly into wall-clock per step.  Run with

    python3 scripts/bench_fft.py [N ...]

The active backend is selected at import through MG_SPECTRAL_FFT=auto|torch|scipy.
"""

import os
import sys
import time

import numpy as np


def bench(fn, n=20):
    fn()
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    return (time.perf_counter() - t0) / n * 1e3


def bench_backend(name, M):
    import scipy.fft as sfft
    if name == "torch":
        import torch
        spec = torch.randn(4, M, M, M // 2 + 1, dtype=torch.complex128)
        phys = torch.randn(3, M, M, M, dtype=torch.float64)
        inv = bench(lambda: torch.fft.irfftn(spec, s=(M, M, M), dim=(1, 2, 3)))
        fwd = bench(lambda: torch.fft.rfftn(phys, dim=(1, 2, 3)))
    else:
        workers = os.cpu_count() or 1
        spec = (np.random.randn(4, M, M, M // 2 + 1)
                + 1j * np.random.randn(4, M, M, M // 2 + 1))
        phys = np.random.randn(3, M, M, M)
        inv = bench(lambda: sfft.irfftn(spec, s=(M, M, M), axes=(1, 2, 3), workers=workers))
        fwd = bench(lambda: sfft.rfftn(phys, axes=(1, 2, 3), workers=workers))
    per_eval = inv + fwd
    print(f"  {name:6s}  irfftn(4): {inv:7.2f} ms   rfftn(3): {fwd:7.2f} ms   "
          f"-> {per_eval:7.2f} ms per nonlinear eval, {4 * per_eval:7.1f} ms per RK4 step")


def main():
    sizes = [int(v) for v in sys.argv[1:]] or [8, 16, 32]
    from mgspectral import _fft
    from mgspectral.fields import GridSpec
    print(f"active backend: {_fft.backend_name()}")
    for N in sizes:
        M = GridSpec(N=N).phys_size
        print(f"N = {N} (padded physical grid {M}^3):")
        try:
            bench_backend("torch", M)
        except ImportError:
            print("  torch   not available")
        bench_backend("scipy", M)


if __name__ == "__main__":
    main()
