"""Exact finite-N statistics of the real eigenvalues.

Two independent routes to the same numbers:

* moments from the coefficient sums over ``a_{j,k}`` (``moment_exact``);
* the one-point density ``rho_1`` assembled from the weight ``w_m`` and
  its partial signed moments ``A_j`` (``density_unscaled``), which can be
  integrated to give the same moments.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import asymptotics
from .errors import DomainError, NumericalConsistencyError, UnsupportedRangeError
from .meijer import coeff_a, default_cache, log_weight_w
from .quadrature import DEFAULT_SPEC, PanelGrid
from .specfun import log_factorial

__all__ = [
    "EnsembleParams",
    "MomentRow",
    "MomentTable",
    "Scaling",
    "DensityCurve",
    "RealDensityModel",
    "density_model",
    "moment_exact",
    "moment_parts",
    "expected_real_count",
    "partial_signed_moment",
    "density_unscaled",
    "density_scaled",
    "density_normalized",
    "density_curve",
    "density_moment",
    "density_cdf_distance",
    "moment_table",
]

MAX_M, MAX_K, MAX_N = 4, 8, 400
_LOG2 = math.log(2.0)
_LOG_SQRT_PI = 0.5 * math.log(math.pi)
# log of 2 sqrt(2 pi), the per-factor normaliser of each density term
_LOG_NORM = math.log(2.0 * math.sqrt(2.0 * math.pi))
# relative size of a negative density value still attributed to rounding
NEGATIVE_TOLERANCE = 1e-13


@dataclass(frozen=True)
class EnsembleParams:
    """Matrix size ``n`` (even) and number of factors ``m``."""

    n: int
    m: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not isinstance(self.m, (int, np.integer)):
            raise DomainError("N and m must be integers")
        if self.n < 2 or self.n % 2:
            raise DomainError(f"N must be even and at least 2 (got N={self.n}); odd N is not implemented")
        if self.m < 1:
            raise DomainError(f"m must be at least 1 (got m={self.m})")

    @property
    def scale(self):
        """``N^(m/2)``, the typical size of an unscaled real eigenvalue."""
        return self.n ** (self.m / 2.0)


def _guard(params, k):
    if params.m > MAX_M or k > MAX_K or params.n > MAX_N:
        raise UnsupportedRangeError(
            f"moment_exact is limited to m <= {MAX_M}, k <= {MAX_K}, N <= {MAX_N} "
            f"(got m={params.m}, k={k}, N={params.n})"
        )


def _log_pair(m, p, q, r, s, spec, cache):
    a = coeff_a(m, p, q, spec, cache).log_value
    b = coeff_a(m, r, s, spec, cache).log_value
    return np.logaddexp(a, b)


def moment_parts(params, k, spec=DEFAULT_SPEC, cache=default_cache):
    """The two positive sums whose difference is ``M_{k,N}`` (``k`` even)."""
    if k < 0 or k % 2:
        raise DomainError("moment_parts needs an even non-negative order")
    _guard(params, k)
    n, m = params.n, params.m
    kap = k // 2
    head = -m * _LOG_SQRT_PI - m * kap * math.log(n)
    t1 = [
        m * (2 * i + kap) * _LOG2 + head - m * log_factorial(2 * i)
        + _log_pair(m, i + 1, i + kap + 1, i + kap + 1, i + 1, spec, cache)
        for i in range(n // 2)
    ]
    t2 = [
        m * (2 * i + 1 + kap) * _LOG2 + head - m * log_factorial(2 * i + 1)
        + _log_pair(m, i + kap + 2, i + 1, i + 2, i + kap + 1, spec, cache)
        for i in range(n // 2 - 1)
    ]
    m1 = math.exp(logsumexp(t1))
    m2 = math.exp(logsumexp(t2)) if t2 else 0.0
    return m1, m2


def moment_exact(params, k, spec=DEFAULT_SPEC, cache=default_cache):
    """``M_{k,N}(m)``: the ``k``-th moment of the scaled real spectral density.

    Odd orders vanish by symmetry and are returned as exactly ``0.0``
    without touching any coefficient.
    """
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise DomainError(f"moment order must be a non-negative integer, got {k!r}")
    if k % 2:
        return 0.0
    m1, m2 = moment_parts(params, k, spec, cache)
    return m1 - m2


def expected_real_count(params, spec=DEFAULT_SPEC, cache=default_cache):
    """``E N_R(m)`` = ``M_{0,N}(m)``."""
    return moment_exact(params, 0, spec, cache)


class RealDensityModel:
    """Tables of ``log w_m`` and of the half-line moments of ``v^j w_m(v)``.

    Everything lives on one composite Gauss-Legendre grid in ``s = log v``:
    coarse panels for ``v < e^-3`` (integrands are smooth there), fine
    panels over the bulk, and a top end past which even ``v^jmax w_m(v)``
    is negligible. ``lower[j]`` and ``upper[j]`` hold
    ``log int_0^v t^j w(t) dt`` and ``log int_v^inf t^j w(t) dt`` at every
    node; ``at`` gives them anywhere.
    """

    S_MIN = -40.0
    S_KNEE = -3.0
    NODES = 16

    def __init__(self, m, jmax, spec=DEFAULT_SPEC, refine=1):
        if m < 1:
            raise DomainError("m must be positive")
        self.m = m
        self.jmax = jmax
        self.spec = spec
        h = min(0.25, 2.5 * math.sqrt(m / (2.0 * (jmax + 1)))) / refine
        s_max = self._top(m, jmax, spec)
        coarse = np.arange(self.S_MIN, self.S_KNEE, 1.0 / refine)
        fine = np.linspace(self.S_KNEE, s_max, int(math.ceil((s_max - self.S_KNEE) / h)) + 1)
        self.grid = PanelGrid(np.concatenate([coarse, fine]), self.NODES)
        self.s = self.grid.nodes
        self.logw = np.array([log_weight_w(m, math.exp(si), spec) for si in self.s])
        j = np.arange(jmax + 1)[:, None]
        # dv = v ds
        self.cum = self.grid.log_cumulative((j + 1) * self.s[None, :] + self.logw[None, :])
        self.lower = self.cum.lower
        self.upper = self.cum.upper
        self.total = self.cum.total

    @staticmethod
    def _top(m, jmax, spec):
        def ell(s):
            return (jmax + 1) * s + log_weight_w(m, math.exp(s), spec)

        s = 0.5 * m * math.log(jmax + 1.0)
        peak = max(ell(s - 0.5), ell(s))
        while True:
            s += 0.25
            v = ell(s)
            peak = max(peak, v)
            if v < peak - 50.0:
                return s

    def log_mellin_total(self, j):
        """Closed form ``log int_0^inf v^j w_m(v) dv = log 2^{m(j+1)/2 - 1} Gamma((j+1)/2)^m``."""
        return (self.m * (j + 1) / 2.0 - 1.0) * _LOG2 + self.m * math.lgamma((j + 1) / 2.0)

    def at(self, v):
        """``(log w, lower, upper)`` at arbitrary positive ``v``."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        s = np.log(v)
        logw = np.array([log_weight_w(self.m, vi, self.spec) for vi in v])
        lower, upper = self.cum.at(s)
        return logw, lower, upper

    def _log_terms(self, n, logx, logw, lower, upper):
        if n - 1 > self.jmax:
            raise DomainError(f"model built for N <= {self.jmax + 1}, asked for N={n}")
        m = self.m
        j = np.arange(n - 1)
        even = (j % 2 == 0)[:, None]
        la = np.where(even, lower[j], upper[j])
        lb = np.where(even, upper[j + 1], lower[j + 1])
        with np.errstate(invalid="ignore"):
            xj = np.where(j[:, None] == 0, 0.0, j[:, None] * logx[None, :])
        head = logw[None, :] + xj - m * _LOG_NORM - m * log_factorial(j)[:, None] + _LOG2
        return head + np.logaddexp(logx[None, :] + la, lb), even[:, 0]

    def _combine(self, logt, even):
        e = logsumexp(logt[even], axis=0)
        o = logsumexp(logt[~even], axis=0) if np.any(~even) else np.full(logt.shape[1], -np.inf)
        big = np.maximum(e, o)
        with np.errstate(invalid="ignore"):
            rho = np.exp(big) * (np.exp(e - big) - np.exp(o - big))
        rho = np.where(np.isfinite(big), rho, 0.0)
        bad = rho < -NEGATIVE_TOLERANCE * np.exp(big)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NumericalConsistencyError(
                f"density is negative beyond rounding ({rho[i]:.3e} vs scale {np.exp(big[i]):.3e})"
            )
        return np.maximum(rho, 0.0)

    def density_at_nodes(self, n):
        """``rho_1`` at every grid node ``v = e^s``."""
        logt, even = self._log_terms(n, self.s, self.logw, self.lower, self.upper)
        return self._combine(logt, even)

    def density(self, n, x):
        """``rho_1(|x|)`` at arbitrary points."""
        x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
        out = np.empty(len(x))
        zero = x == 0
        if np.any(zero):
            if self.m >= 2:
                raise DomainError("rho_1 is singular at x = 0 for m >= 2")
            # only the j = 0 term survives: -w(0) A_1(0) / (2 sqrt(2 pi))
            out[zero] = math.exp(_LOG2 + self.total[1] - _LOG_NORM)
        if np.any(~zero):
            logw, lower, upper = self.at(x[~zero])
            logt, even = self._log_terms(n, np.log(x[~zero]), logw, lower, upper)
            out[~zero] = self._combine(logt, even)
        return out

    def density_signed(self, n, x):
        """``rho_1(x)`` straight from the kernel formula, keeping every sign.

        No use of evenness: ``A_j(x)`` is built with the sign pattern of
        ``sgn(x - v)`` for the actual ``x``. Used to check symmetry.
        """
        x = float(x)
        if x == 0:
            return float(self.density(n, [0.0])[0])
        logw, lower, upper = self.at([abs(x)])
        lower, upper = lower[:, 0], upper[:, 0]
        pos = x > 0
        total = 0.0
        for j in range(n - 1):
            aj = signed_A(j, pos, lower, upper)
            aj1 = signed_A(j + 1, pos, lower, upper)
            inner = x * aj - aj1
            scale = math.exp(logw[0] - self.m * _LOG_NORM - self.m * log_factorial(j))
            total += scale * x ** j * inner
        return total

    def moment(self, n, k):
        """``int v^k rho_1(v) dv`` over R by quadrature on the grid nodes."""
        if k % 2:
            return 0.0
        rho = self.density_at_nodes(n)
        return 2.0 * float(np.dot(self.grid.weights, np.exp((k + 1) * self.s) * rho))

    def half_cdf(self, n):
        """``int_0^v rho_1`` at the nodes and the half-line total."""
        rho = self.density_at_nodes(n)
        with np.errstate(divide="ignore"):
            cum = self.grid.log_cumulative(self.s + np.log(rho))
        return np.exp(cum.lower[0]), float(np.exp(cum.total[0]))


def signed_A(j, positive, lower, upper):
    """``A_j(x)`` from half-line integrals at ``|x|``; ``positive`` is ``x > 0``."""
    if j % 2 == 0:
        val = 2.0 * math.exp(lower[j])
        return val if positive else -val
    return -2.0 * math.exp(upper[j])


_models = {}
_models_lock = threading.Lock()


def density_model(m, n, spec=DEFAULT_SPEC):
    """Shared ``RealDensityModel`` able to serve matrix size ``n``.

    Models are kept per ``(m, spec)`` and rebuilt with a margin when a
    larger ``n`` is requested.
    """
    with _models_lock:
        model = _models.get((m, spec))
    if model is None or model.jmax < n - 1:
        jmax = max(n - 1, 63 if model is None else 2 * model.jmax + 1)
        model = RealDensityModel(m, jmax, spec)
        with _models_lock:
            _models[(m, spec)] = model
    return model


def partial_signed_moment(m, j, x, spec=DEFAULT_SPEC):
    """``A_j(x) = int w_m(v) sgn(x - v) v^j dv``."""
    if j < 0:
        raise DomainError("j must be non-negative")
    x = float(x)
    model = density_model(m, j + 2, spec)
    if x == 0:
        if j % 2 == 0:
            return 0.0
        return -2.0 * math.exp(model.total[j])
    _, lower, upper = model.at([abs(x)])
    return signed_A(j, x > 0, lower[:, 0], upper[:, 0])


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def density_unscaled(params, x, spec=DEFAULT_SPEC):
    """``rho_1(x)``: the density of real eigenvalues of ``G_1 ... G_m``."""
    arr, scalar = _as_array(x)
    if params.m >= 2 and np.any(arr == 0):
        raise DomainError("rho_1 is singular at x = 0 for m >= 2")
    out = density_model(params.m, params.n, spec).density(params.n, arr.ravel()).reshape(arr.shape)
    return float(out) if scalar else out


def density_scaled(params, x, spec=DEFAULT_SPEC):
    """``N^(m/2) rho_1(N^(m/2) x)``; integrates to ``E N_R``."""
    arr, scalar = _as_array(x)
    sc = params.scale
    out = sc * np.asarray(density_unscaled(params, arr * sc, spec))
    return float(out) if scalar else out


def density_normalized(params, x, spec=DEFAULT_SPEC, cache=default_cache):
    """``h_{N,m}(x)``: the scaled density divided by ``E N_R``."""
    arr, scalar = _as_array(x)
    out = np.asarray(density_scaled(params, arr, spec)) / expected_real_count(params, spec, cache)
    return float(out) if scalar else out


def density_moment(params, k, spec=DEFAULT_SPEC):
    """``int x^k density_scaled(x) dx`` by quadrature of the density itself."""
    if k % 2:
        return 0.0
    model = density_model(params.m, params.n, spec)
    return model.moment(params.n, k) * params.n ** (-params.m * k / 2.0)


def density_cdf_distance(params, spec=DEFAULT_SPEC):
    """Sup distance between the CDF of ``h_{N,m}`` and the limit CDF.

    Both distributions are symmetric, so the supremum is taken over
    ``x >= 0`` at the grid nodes.
    """
    model = density_model(params.m, params.n, spec)
    part, half = model.half_cdf(params.n)
    x = np.exp(model.s) / params.scale
    cdf = 0.5 + 0.5 * part / half
    return float(np.max(np.abs(cdf - asymptotics.limit_cdf(params.m, x))))


class Scaling(str, enum.Enum):
    UNSCALED = "unscaled"
    SCALED = "scaled_N_minus_m_over_2"
    NORMALIZED = "normalized"


@dataclass
class DensityCurve:
    scaling: Scaling
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise DomainError("grid and values must have the same shape")
        if np.any(self.values < 0):
            raise NumericalConsistencyError("density values must be non-negative")


def density_curve(params, grid, scaling=Scaling.SCALED, spec=DEFAULT_SPEC, cache=default_cache):
    scaling = Scaling(scaling)
    fn = {
        Scaling.UNSCALED: lambda g: density_unscaled(params, g, spec),
        Scaling.SCALED: lambda g: density_scaled(params, g, spec),
        Scaling.NORMALIZED: lambda g: density_normalized(params, g, spec, cache),
    }[scaling]
    grid = np.asarray(grid, dtype=float)
    return DensityCurve(scaling, grid, fn(grid))


@dataclass(frozen=True)
class MomentRow:
    exact: float
    asymptotic: float
    limit: float


@dataclass
class MomentTable:
    params: EnsembleParams
    entries: dict = field(default_factory=dict)

    def rows(self):
        return [(k, r.exact, r.asymptotic, r.limit) for k, r in sorted(self.entries.items())]


def moment_table(params, k_max, spec=DEFAULT_SPEC, cache=default_cache):
    """Exact, leading-order and limiting moments for ``k = 0 .. k_max``.

    ``limit`` is the limit of ``M_k / M_0`` (moments of the limit density),
    ``asymptotic`` the leading-order value of ``M_k`` itself.
    """
    if k_max < 0:
        raise DomainError("k_max must be non-negative")
    table = MomentTable(params)
    for k in range(k_max + 1):
        table.entries[k] = MomentRow(
            exact=moment_exact(params, k, spec, cache),
            asymptotic=asymptotics.moment_asymptotic(params, k),
            limit=asymptotics.limit_moment(params.m, k),
        )
    return table
