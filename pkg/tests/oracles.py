"""Independent oracles used by the test suite.

These deliberately re-derive results through routes the library does not
take: exact rational arithmetic for the symbols, and a direct convolution
sum (no FFT) for the quadratic term.  Keep them independent of
mgspectral's evaluation paths.
"""

from fractions import Fraction

import numpy as np


def rational_M(k):
    """(M1, M2, M3) as exact Fractions, straight from the closed forms."""
    k1, k2, k3 = (int(c) for c in k)
    if k3 == 0:
        return (Fraction(0), Fraction(0), Fraction(0))
    ksq = k1 * k1 + k2 * k2 + k3 * k3
    den = k3 * k3 * ksq + k2 ** 4
    return (
        Fraction(k2 * k3 * ksq - k1 * k2 * k2 * k3, den),
        Fraction(-k1 * k3 * ksq - k2 ** 3 * k3, den),
        Fraction(k2 * k2 * (k1 * k1 + k2 * k2), den),
    )


def brute_nonlinear(theta):
    """-P[u . grad theta] by direct convolution over all mode pairs.

    N(k) = -i sum_{a+b=k} (M(a) . b) theta_hat(a) theta_hat(b), truncated to
    the cube and with the {k3 = 0} plane projected out.  O(modes^2); only
    usable at small N.
    """
    N = theta.grid.N
    n = 2 * N + 1
    kvals = np.arange(-N, N + 1)
    B1, B2, B3 = np.meshgrid(kvals, kvals, kvals, indexing="ij")
    c = theta.coeffs
    out = np.zeros((n, n, n), dtype=complex)
    for i1 in range(n):
        for i2 in range(n):
            for i3 in range(n):
                ta = c[i1, i2, i3]
                if ta == 0:
                    continue
                a = (i1 - N, i2 - N, i3 - N)
                m = rational_M(a)
                dot = float(m[0]) * B1 + float(m[1]) * B2 + float(m[2]) * B3
                contrib = -1j * dot * ta * c
                lo = [max(0, -ai) for ai in a]
                hi = [min(n, n - ai) for ai in a]
                out[lo[0] + a[0]:hi[0] + a[0],
                    lo[1] + a[1]:hi[1] + a[1],
                    lo[2] + a[2]:hi[2] + a[2]] += contrib[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
    out[:, :, N] = 0
    return out
