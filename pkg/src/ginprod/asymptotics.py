"""Large-N predictions: real-eigenvalue count, moments, limit density,
the two-term expansion of the chain integral ``I_{j+l1, j+l2}(m)`` and the
tridiagonal Hessian of its phase function at the boundary saddle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .specfun import LogScaled

__all__ = [
    "PHASE_AT_SADDLE_PER_FACTOR",
    "SaddleExpansion",
    "expected_count_asymptotic",
    "moment_asymptotic",
    "limit_density",
    "limit_cdf",
    "limit_moment",
    "leading_constant",
    "saddle_expansion",
    "coeff_I_asymptotic",
    "coeff_I_prefactor",
    "phase_function",
    "hessian",
    "hessian_det",
    "interior_hessian",
    "interior_hessian_det",
    "interior_hessian_det_exact",
    "hessian_inverse_entry",
]

# Phi(1, ..., 1) = -m log 4
PHASE_AT_SADDLE_PER_FACTOR = -math.log(4.0)


def _n_m(params):
    return params.n, params.m


def expected_count_asymptotic(params):
    """``sqrt(2 N m / pi)``."""
    n, m = _n_m(params)
    return math.sqrt(2.0 * n * m / math.pi)


def moment_asymptotic(params, k):
    """Leading-order ``M_{k,N}``: ``sqrt(2Nm/pi) / (m k + 1)``; 0 for odd ``k``."""
    if k < 0:
        raise DomainError("moment order must be non-negative")
    if k % 2:
        return 0.0
    return expected_count_asymptotic(params) / (params.m * k + 1)


def limit_density(m, x):
    """``|x|^(1/m - 1) / (2m)`` on [-1, 1], zero outside."""
    x = np.asarray(x, dtype=float)
    if m >= 2 and np.any(x == 0):
        raise DomainError("limit density is singular at x = 0 for m >= 2")
    ax = np.abs(x)
    with np.errstate(divide="ignore"):
        out = np.where(ax <= 1.0, ax ** (1.0 / m - 1.0) / (2.0 * m), 0.0)
    return float(out) if out.ndim == 0 else out


def limit_cdf(m, x):
    """CDF of ``|U|^m B``: ``(1 + sign(x) min(|x|, 1)^(1/m)) / 2``."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * (1.0 + np.sign(x) * np.minimum(np.abs(x), 1.0) ** (1.0 / m))
    return float(out) if out.ndim == 0 else out


def limit_moment(m, k):
    """``1 / (m k + 1)`` for even ``k``, 0 for odd ``k``."""
    if k < 0:
        raise DomainError("moment order must be non-negative")
    return 0.0 if k % 2 else 1.0 / (m * k + 1)


@dataclass(frozen=True)
class SaddleExpansion:
    """Coefficients of ``a0 + a1 j^(-1/2) + O(1/j)``."""

    m: int
    l1: int
    l2: int
    a0: float
    a1: float


def leading_constant(m, corrected=False):
    """Leading coefficient ``a0(m)`` of the chain-integral expansion.

    The published constant is ``pi^(m/2) 2^(-m/2-1) m^(-1/2)``. Numerically
    the limit is ``pi^(m/2) 2^(-m/2-1)``; the two agree only for ``m = 1``.
    ``corrected=True`` returns the latter. The moment asymptotics do not
    depend on ``a0``, since it cancels between the two moment sums.
    """
    if m < 1:
        raise DomainError("m must be positive")
    a0 = math.pi ** (m / 2) * 2.0 ** (-m / 2 - 1)
    return a0 if corrected else a0 / math.sqrt(m)


def saddle_expansion(m, l1, l2, corrected=False):
    """Two-term expansion coefficients; see ``leading_constant`` for ``corrected``."""
    a0 = leading_constant(m, corrected)
    a1 = math.pi ** ((m - 1) / 2) * 2.0 ** (-m / 2 - 1) * (0.5 - l1 + l2) * math.sqrt(m)
    return SaddleExpansion(m, l1, l2, a0, a1)


def coeff_I_asymptotic(m, j, l1, l2, corrected=False):
    """The bracket ``a0 + a1 / sqrt(j)``; multiply by ``coeff_I_prefactor``."""
    if j < 1:
        raise DomainError("j must be positive")
    e = saddle_expansion(m, l1, l2, corrected)
    return e.a0 + e.a1 / math.sqrt(j)


def coeff_I_prefactor(m, j, l1, l2):
    """``j^(-m/2) 4^(-m j) 2^(-m (l1 + l2 - 2))`` as a ``LogScaled``."""
    log_p = -0.5 * m * math.log(j) + m * j * PHASE_AT_SADDLE_PER_FACTOR
    log_p -= m * (l1 + l2 - 2) * math.log(2.0)
    return LogScaled(1, log_p)


def phase_function(x):
    """The exponent ``Phi(x_1, ..., x_m)`` multiplying ``j`` in the chain integral."""
    x = np.asarray(x, dtype=float)
    r = x[:-1] / x[1:]
    return (2 * math.log(x[0]) - 2 * math.log1p(x[0]) - math.log(x[-1])
            - 2 * float(np.sum(np.log1p(r))))


def hessian(m):
    """Hessian of ``Phi`` at (1, ..., 1): tridiagonal, ``-1`` on the diagonal
    except a final ``-1/2``, ``1/2`` off the diagonal."""
    if m < 1:
        raise DomainError("m must be positive")
    H = np.diag(np.full(m, -1.0)) + np.diag(np.full(m - 1, 0.5), 1) + np.diag(np.full(m - 1, 0.5), -1)
    H[-1, -1] = -0.5
    return H


def interior_hessian(m):
    """The ``m x m`` block with every diagonal entry ``-1`` (the leading block
    of ``hessian(m + 1)``); the Gaussian integral over the unconstrained
    variables uses it with size ``m - 1``."""
    if m < 1:
        raise DomainError("m must be positive")
    return np.diag(np.full(m, -1.0)) + np.diag(np.full(m - 1, 0.5), 1) + np.diag(np.full(m - 1, 0.5), -1)


def _tridiag_det(diag, off_sq):
    # D_k = d_k D_{k-1} - b^2 D_{k-2}
    prev, cur = 1, diag[0]
    for d in diag[1:]:
        prev, cur = cur, d * cur - off_sq * prev
    return cur


def interior_hessian_det_exact(m):
    """``det(-H)`` of the interior block by exact rational recurrence."""
    if m < 1:
        raise DomainError("m must be positive")
    return _tridiag_det([Fraction(1)] * m, Fraction(1, 4))


def interior_hessian_det(m):
    """Floating-point recurrence for ``det(-H)`` of the interior block; ``(m+1)/2^m``."""
    if m < 1:
        raise DomainError("m must be positive")
    return float(_tridiag_det([1.0] * m, 0.25))


def hessian_det(m):
    """``det(-hessian(m))`` by exact recurrence; equals ``2^-m``."""
    if m < 1:
        raise DomainError("m must be positive")
    return _tridiag_det([Fraction(1)] * (m - 1) + [Fraction(1, 2)], Fraction(1, 4))


def hessian_inverse_entry(m, i, j):
    """``(H^-1)_{ij} = 2 i (j - m - 1) / (m + 1)`` (``i <= j``, symmetric) for
    the interior block of size ``m``."""
    if not (1 <= i <= m and 1 <= j <= m):
        raise DomainError(f"index ({i}, {j}) out of range for m = {m}")
    i, j = min(i, j), max(i, j)
    return 2.0 * i * (j - m - 1) / (m + 1)
