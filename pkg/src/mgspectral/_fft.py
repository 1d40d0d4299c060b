"""FFT backend selection.

All transforms in the package go through this module.  Two interchangeable
backends provide the same double-precision pocketfft algorithms:

* ``torch`` (if importable) — noticeably faster on CPU thanks to better
  SIMD kernels and threading; this is what keeps the 32^3 production runs
  inside their runtime budgets.
* ``scipy`` — always available, used as the fallback.

The backend is picked once at import time.  Set ``MG_SPECTRAL_FFT`` to
``torch``, ``scipy`` or ``auto`` (default) to override.  ``scripts/bench_fft.py``
compares the two on the transform sizes the solver actually uses.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.fft as _sfft


def _make_scipy_backend():
    workers = os.cpu_count() or 1

    def rfftn(a, axes=None):
        return _sfft.rfftn(a, axes=axes, workers=workers)

    def irfftn(a, s, axes=None):
        return _sfft.irfftn(a, s=s, axes=axes, workers=workers)

    def fftn(a):
        return _sfft.fftn(a, workers=workers)

    def ifftn(a):
        return _sfft.ifftn(a, workers=workers)

    return "scipy", rfftn, irfftn, fftn, ifftn


def _make_torch_backend():
    import torch

    def rfftn(a, axes=None):
        if axes is None:
            return torch.fft.rfftn(torch.from_numpy(a)).numpy()
        return torch.fft.rfftn(torch.from_numpy(a), dim=axes).numpy()

    def irfftn(a, s, axes=None):
        if axes is None:
            return torch.fft.irfftn(torch.from_numpy(a), s=s).numpy()
        return torch.fft.irfftn(torch.from_numpy(a), s=s, dim=axes).numpy()

    def fftn(a):
        return torch.fft.fftn(torch.from_numpy(a)).numpy()

    def ifftn(a):
        return torch.fft.ifftn(torch.from_numpy(a)).numpy()

    return "torch", rfftn, irfftn, fftn, ifftn


def _select_backend():
    choice = os.environ.get("MG_SPECTRAL_FFT", "auto").lower()
    if choice not in ("auto", "torch", "scipy"):
        raise ValueError(f"MG_SPECTRAL_FFT must be auto|torch|scipy, got {choice!r}")
    if choice in ("auto", "torch"):
        try:
            return _make_torch_backend()
        except ImportError:
            if choice == "torch":
                raise
    return _make_scipy_backend()


BACKEND, rfftn, irfftn, fftn, ifftn = _select_backend()


def backend_name() -> str:
    return BACKEND


def next_fast_len(n: int) -> int:
    # both backends are pocketfft: sizes with factors up to 11 are fast,
    # so do not restrict to 5-smooth lengths (98 beats 100 at N = 32)
    return _sfft.next_fast_len(n, real=False)


def fft_contiguous(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a)
