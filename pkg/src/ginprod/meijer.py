"""Meijer G-type quantities: the moment coefficients ``a_{j,k}`` and the
weight ``w_m`` of a product of ``m`` standard Gaussians.

``a_{j,k}`` is the Mellin-Barnes integral

    a = (1/2 pi i) int_{Re s = -1/4} Gamma(k - s)^m Gamma(j - 1/2 + s)^m / (-s) ds

evaluated on the vertical line. ``coeff_a_oracle`` computes the same number
from the equivalent ``m``-fold real integral by nested quadrature, sharing
no code with the contour route beyond the Gauss-Legendre nodes.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import digamma, polygamma

from .errors import DomainError, GinprodError, QuadratureError, UnsupportedRangeError
from .quadrature import DEFAULT_SPEC, PanelGrid, QuadratureSpec, contour_real_part
from .specfun import LogScaled, log_gamma_complex

__all__ = [
    "QuadratureSpec",
    "MeijerCoefficient",
    "CoefficientCache",
    "default_cache",
    "coeff_a",
    "coeff_I",
    "coeff_a_oracle",
    "weight_w",
    "log_weight_w",
]

CACHE_HEADER = "ginprod-cache v1"


@dataclass(frozen=True)
class MeijerCoefficient:
    m: int
    j: int
    k: int
    value: LogScaled

    def __post_init__(self):
        if self.value.sign != 1:
            raise GinprodError(f"a_({self.j},{self.k}) for m={self.m} must be positive")

    @property
    def log_value(self):
        return self.value.log_mag


class CoefficientCache:
    """Thread-safe memo of ``log a_{j,k}`` keyed by ``(m, j, k)``.

    Stored values are deterministic, so concurrent writers of the same key
    are harmless; the last one wins.
    """

    def __init__(self, path=None):
        self._data = {}
        self._lock = threading.Lock()
        self.path = path
        if path is not None and os.path.exists(path):
            self.load(path)

    def get(self, key):
        with self._lock:
            return self._data.get(key)

    def put(self, key, log_value):
        with self._lock:
            self._data[key] = float(log_value)

    def __len__(self):
        with self._lock:
            return len(self._data)

    def __contains__(self, key):
        with self._lock:
            return key in self._data

    def clear(self):
        with self._lock:
            self._data.clear()

    def load(self, path):
        with open(path, encoding="ascii") as fh:
            header = fh.readline().strip()
            if header != CACHE_HEADER:
                raise GinprodError(f"{path}: not a coefficient cache (header {header!r})")
            rows = {}
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 4:
                    raise GinprodError(f"{path}:{lineno}: expected 'm j k log_a'")
                m, j, k = (int(p) for p in parts[:3])
                rows[(m, j, k)] = float(parts[3])
        with self._lock:
            self._data.update(rows)

    def save(self, path=None):
        path = path or self.path
        if path is None:
            raise GinprodError("no cache path given")
        with self._lock:
            items = sorted(self._data.items())
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write(CACHE_HEADER + "\n")
            for (m, j, k), v in items:
                fh.write(f"{m} {j} {k} {v!r}\n")
        os.replace(tmp, path)


default_cache = CoefficientCache()


def _check_mjk(m, j, k):
    for name, v in (("m", m), ("j", j), ("k", k)):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v!r}")


def _log_coeff_a(m, j, k, spec):
    def logf(eta):
        s = -0.25 + 1j * np.asarray(eta)
        return m * (log_gamma_complex(k - s) + log_gamma_complex(j - 0.5 + s)) - np.log(-s)

    curvature = m * (polygamma(1, k + 0.25) + polygamma(1, j - 0.75))
    sign, logmag, _ = contour_real_part(
        logf, near_scale=0.25, bulk_scale=1.0 / math.sqrt(curvature), spec=spec,
        what=f"a({j},{k}; m={m})",
    )
    if sign != 1:
        raise QuadratureError(f"a({j},{k}; m={m}) came out non-positive")
    return logmag


def coeff_a(m, j, k, spec=DEFAULT_SPEC, cache=default_cache):
    """``a_{j,k}`` for the ``m``-factor product, by the contour route."""
    _check_mjk(m, j, k)
    key = (int(m), int(j), int(k))
    hit = cache.get(key) if cache is not None else None
    if hit is None:
        hit = _log_coeff_a(int(m), int(j), int(k), spec)
        if cache is not None:
            cache.put(key, hit)
    return MeijerCoefficient(int(m), int(j), int(k), LogScaled(1, hit))


def coeff_I(m, j, k, spec=DEFAULT_SPEC, cache=default_cache):
    """``I_{j,k}(m) = a_{j,k} / Gamma(j + k - 1/2)^m`` as a ``LogScaled``."""
    a = coeff_a(m, j, k, spec, cache).value
    return LogScaled(1, a.log_mag - m * math.lgamma(j + k - 0.5))


def _oracle_grid(center_lo, center_hi, lo, hi, width, n):
    # fine panels over the bulk, geometrically widening panels in the tails
    core_lo, core_hi = max(lo, center_lo - 10.0), min(hi, center_hi + 10.0)
    edges = list(np.linspace(core_lo, core_hi, max(2, int(math.ceil((core_hi - core_lo) / width))) + 1))
    h = width
    while edges[-1] < hi:
        h *= 1.4
        edges.append(min(hi, edges[-1] + h))
    h = width
    while edges[0] > lo:
        h *= 1.4
        edges.insert(0, max(lo, edges[0] - h))
    return PanelGrid(np.asarray(edges), n)


def _oracle_log_integral(m, j, k, width, n):
    e = j + k - 0.5
    lead = np.log(j - 0.5) - np.log(k)  # mode of each chain factor
    def log_chain(d):
        return (j - 0.5) * d - e * np.logaddexp(0.0, d)

    def log_end(u):
        return k * u - e * np.logaddexp(0.0, u)

    # slowest tail rates are >= 1/2; 110 nats of room beyond the bulk
    reach = 110.0 / min(0.5, j - 0.5, k)
    lo_c, hi_c = sorted((-lead, -m * lead))
    inner = _oracle_grid(lo_c, hi_c, lo_c - reach, hi_c + reach, width, n)
    last = _oracle_grid(max(0.0, lo_c), max(0.0, hi_c), 0.0, max(0.0, hi_c) + reach, width, n)

    # J_0 lives on the inner grid; each level integrates out one chain variable
    logJ = log_end(inner.nodes)
    for level in range(1, m):
        target = last if level == m - 1 else inner
        kern = log_chain(inner.nodes[None, :] - target.nodes[:, None])
        lw = np.log(inner.weights)[None, :] + logJ[None, :] + kern
        piv = np.max(lw, axis=1, keepdims=True)
        logJ = np.log(np.sum(np.exp(lw - piv), axis=1)) + piv[:, 0]
    if m == 1:
        logJ = log_end(last.nodes)
    lw = np.log(last.weights) + logJ
    piv = np.max(lw)
    return float(piv + np.log(np.sum(np.exp(lw - piv))))


def coeff_a_oracle(m, j, k, spec=DEFAULT_SPEC):
    """``a_{j,k}`` from the ``m``-fold real integral representation.

    With ``x_l = exp(u_l)`` the integrand is a chain of smooth bumps
    ``phi(u_l - u_{l+1})`` ending in ``psi(u_1)``, over ``u_m > 0`` and
    ``u_1..u_{m-1}`` in R. The chain variables are integrated out one at a
    time on composite Gauss-Legendre grids; the grid is halved until two
    levels agree to ``spec.rel_tol``.
    """
    _check_mjk(m, j, k)
    if m > 3 or j > 12 or k > 12:
        raise UnsupportedRangeError("coeff_a_oracle supports m <= 3 and j, k <= 12")
    n = 16
    width = 0.5
    prev = _oracle_log_integral(m, j, k, width, n)
    for _ in range(4):
        width /= 2
        cur = _oracle_log_integral(m, j, k, width, n)
        if abs(cur - prev) <= spec.rel_tol:
            break
        prev = cur
    else:
        raise QuadratureError(
            f"oracle a({j},{k}; m={m}) did not converge", estimate=math.exp(cur),
            error_bound=abs(math.exp(cur) - math.exp(prev)),
        )
    return LogScaled(1, cur + m * math.lgamma(j + k - 0.5))


def _mellin_shift(m, logz):
    """Real saddle ``c > 0`` of ``m log Gamma(t) - t log z``."""
    f = lambda t: m * digamma(t) - logz
    lo, hi = 1e-12, 1.0
    while f(hi) < 0:
        hi *= 2.0
    while f(lo) > 0:
        lo *= 1e-3
    return brentq(f, lo, hi, xtol=1e-14, rtol=1e-12)


def log_weight_w(m, x, spec=DEFAULT_SPEC):
    """``log w_m(x)`` with ``w_m(x) = G^{m,0}_{0,m}(x^2 / 2^m | 0,...,0)``.

    Inverts the Mellin transform ``Gamma(t)^m`` on the line through the real
    saddle of the integrand, so that the contour is locally steepest
    descent for every argument.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    x = abs(float(x))
    if x == 0.0:
        if m == 1:
            return 0.0
        raise DomainError("w_m diverges at x = 0 for m >= 2")
    logz = 2.0 * math.log(x) - m * math.log(2.0)
    c = _mellin_shift(m, logz)

    def logf(eta):
        t = c + 1j * np.asarray(eta)
        return m * log_gamma_complex(t) - t * logz

    sigma = 1.0 / math.sqrt(m * polygamma(1, c))
    sign, logmag, _ = contour_real_part(
        logf, near_scale=c, bulk_scale=sigma, spec=spec, what=f"w_{m}({x:g})"
    )
    if sign != 1:
        raise QuadratureError(f"w_{m}({x:g}) came out non-positive")
    return logmag


def weight_w(m, x, spec=DEFAULT_SPEC):
    """``w_m(x)``; may underflow to 0 far in the tail, use ``log_weight_w`` there."""
    return math.exp(log_weight_w(m, x, spec))
