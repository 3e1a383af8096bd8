"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels`` must agree with them to
rounding. Both operate on contiguous complex128 / float64 arrays.
"""

import numpy as np

LANCZOS_G = 7.0
LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
HALF_LOG_2PI = 0.91893853320467274178


def loggamma(z):
    """Principal log-gamma of a complex array (no pole checks)."""
    z = np.asarray(z, dtype=np.complex128)
    shift = np.zeros(z.shape, dtype=np.complex128)
    w = z.copy()
    # upward recurrence log G(w) = log G(w+1) - log w keeps the principal branch
    low = w.real < 0.5
    while np.any(low):
        shift[low] += np.log(w[low])
        w[low] += 1.0
        low = w.real < 0.5
    x = w - 1.0
    acc = np.full(z.shape, LANCZOS_COEF[0], dtype=np.complex128)
    for i in range(1, len(LANCZOS_COEF)):
        acc += LANCZOS_COEF[i] / (x + i)
    t = x + LANCZOS_G + 0.5
    return HALF_LOG_2PI + (x + 0.5) * np.log(t) - t + np.log(acc) - shift


def shifted_real_exp_sum(g, weights, pivot):
    """Return sum(weights * Re(exp(g - pivot)))."""
    g = np.asarray(g, dtype=np.complex128)
    return float(np.dot(weights, np.exp(g.real - pivot) * np.cos(g.imag)))
