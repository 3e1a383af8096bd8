"""Composite Gauss-Legendre machinery.

Two consumers: vertical-line contour integrals (``contour_real_part``),
which need graded panels near a nearby pole, oscillation-aware panel
widths and a log-space pivot; and cumulative integrals on fixed panel
grids (``PanelGrid``), which use the spectral integration matrix of the
Gauss-Legendre interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from . import _kernels
from .errors import DomainError, QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy and panel controls shared by every quadrature routine.

    Attributes
    ----------
    rel_tol : float
        Target relative error of a returned integral.
    nodes_per_panel : int
        Gauss-Legendre order on each panel.
    drop_threshold : float
        Truncate a contour once the log-integrand falls this far below its
        peak (natural-log units).
    max_panels : int
        Refinement gives up beyond this many panels.
    """

    rel_tol: float = 1e-12
    nodes_per_panel: int = 32
    drop_threshold: float = 40.0
    max_panels: int = 4096

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.nodes_per_panel < 8:
            raise DomainError("nodes_per_panel must be at least 8")
        if self.drop_threshold < 30:
            raise DomainError("drop_threshold must be at least 30")
        if self.max_panels < 1:
            raise DomainError("max_panels must be positive")


DEFAULT_SPEC = QuadratureSpec()
_EPS = np.finfo(float).eps


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@lru_cache(maxsize=None)
def integration_matrix(n):
    """``S[i, k]`` with ``sum_k S[i, k] f(x_k) = int_{-1}^{x_i} p(t) dt``.

    ``p`` is the degree ``n-1`` interpolant of ``f`` at the Gauss-Legendre
    nodes; uses ``int_{-1}^x P_l = (P_{l+1}(x) - P_{l-1}(x)) / (2l + 1)``.
    """
    S = integration_weights(n, gauss_legendre(n)[0])
    S.flags.writeable = False
    return S


def integration_weights(n, tau):
    """Row vectors ``c(tau)`` with ``c . f(x) = int_{-1}^{tau} p(t) dt``.

    Same interpolant as ``integration_matrix``, evaluated at arbitrary
    points ``tau`` in [-1, 1]; shape ``(len(tau), n)``.
    """
    x, w = gauss_legendre(n)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    V = legendre.legvander(x, n - 1)
    T = legendre.legvander(tau, n)
    antider = np.empty((len(tau), n))
    antider[:, 0] = tau + 1.0
    for ell in range(1, n):
        antider[:, ell] = (T[:, ell + 1] - T[:, ell - 1]) / (2 * ell + 1)
    coef = (2 * np.arange(n) + 1) / 2.0
    return antider @ (coef[:, None] * V.T) * w[None, :]


def panel_nodes(edges, n):
    """Flattened nodes and weights of a composite rule on ``edges``."""
    x, w = gauss_legendre(n)
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_edges(first, widest, stop):
    """Panel edges on [0, stop]: widths double from ``first`` up to ``widest``."""
    edges = [0.0]
    h = min(first, widest)
    while edges[-1] + h < stop and h < widest:
        edges.append(edges[-1] + h)
        h *= 2.0
    rest = stop - edges[-1]
    count = max(1, int(math.ceil(rest / widest - 1e-9)))
    edges.extend(edges[-1] + rest * np.arange(1, count + 1) / count)
    return np.asarray(edges)


def split_edges(edges, parts):
    if parts == 1:
        return np.asarray(edges)
    a = np.asarray(edges[:-1])
    b = np.asarray(edges[1:])
    t = np.arange(parts) / parts
    inner = (a[:, None] + (b - a)[:, None] * t[None, :]).ravel()
    return np.append(inner, edges[-1])


def contour_real_part(logf, near_scale, bulk_scale, spec=DEFAULT_SPEC, what="integral"):
    """``log`` of ``(1/pi) int_0^inf Re exp(logf(eta)) d eta``.

    ``logf`` maps a float array of ``eta`` values to complex log-integrand
    values. The integrand is assumed to have conjugate symmetry about
    ``eta = 0``, so that this equals ``(1/2 pi) int_R``.

    ``near_scale`` is the distance from the contour to the nearest
    singularity close to ``eta = 0`` and sets the first panel widths;
    ``bulk_scale`` is the width of the main bump. Panels are refined by
    halving until two consecutive levels agree to ``spec.rel_tol``.

    Returns
    -------
    (sign, log_magnitude, error_estimate_relative)
    """
    drop = spec.drop_threshold
    n = spec.nodes_per_panel
    g0 = float(np.real(logf(np.zeros(1)))[0])

    # doubling search for the truncation point
    stop = max(1.0, 2.0 * bulk_scale)
    peak = g0
    for _ in range(80):
        g = float(np.real(logf(np.array([stop])))[0])
        peak = max(peak, g)
        if g < peak - drop:
            break
        stop *= 2.0
    else:
        raise QuadratureError(f"{what}: integrand does not decay along the contour")

    for _ in range(8):
        # oscillation rate at the cutoff, where it is largest
        delta = 1e-4 * max(1.0, stop)
        ph = np.imag(logf(np.array([stop - delta, stop])))
        omega = abs(ph[1] - ph[0]) / delta
        widest = 4.0 * max(bulk_scale, near_scale)
        if omega > 0:
            widest = min(widest, 2.0 * math.pi / omega)
        widest = max(widest, 1e-3)
        base = graded_edges(0.5 * min(near_scale, widest), widest, stop)

        previous = None
        parts = 1
        while True:
            edges = split_edges(base, parts)
            if len(edges) - 1 > spec.max_panels:
                raise QuadratureError(
                    f"{what}: refinement exceeded {spec.max_panels} panels",
                    estimate=previous[0] if previous else math.nan,
                    error_bound=previous[1] if previous else math.inf,
                )
            nodes, weights = panel_nodes(edges, n)
            g = logf(nodes)
            pivot = float(np.max(g.real))
            total = _kernels.shifted_real_exp_sum(g, weights, pivot)
            scale = float(np.dot(weights, np.exp(g.real - pivot)))
            # rounding in log-integrands of size |g| caps the attainable accuracy
            tol = max(spec.rel_tol, 32 * _EPS * float(np.max(np.abs(g))))
            if previous is not None:
                err = abs(total - previous[0] * math.exp(previous[2] - pivot))
                if err <= tol * abs(total) or err <= 1e-3 * tol * scale:
                    break
            previous = (total, math.inf, pivot)
            parts *= 2
        tail = float(np.real(logf(np.array([stop])))[0])
        if tail < pivot - drop:
            break
        stop *= 2.0
        peak = pivot
    else:
        raise QuadratureError(f"{what}: truncation point did not stabilise")

    if total == 0.0:
        raise QuadratureError(f"{what}: integral vanished to rounding", estimate=0.0)
    rel_err = err / abs(total)
    return (1 if total > 0 else -1), pivot + math.log(abs(total)) - math.log(math.pi), rel_err


class PanelGrid:
    """A composite Gauss-Legendre grid with cumulative-integral support."""

    def __init__(self, edges, n):
        self.edges = np.asarray(edges, dtype=float)
        self.n = n
        self.nodes, self.weights = panel_nodes(self.edges, n)
        self.npanels = len(self.edges) - 1
        self.half = 0.5 * np.diff(self.edges)

    def refined(self, parts=2):
        return PanelGrid(split_edges(self.edges, parts), self.n)

    def log_cumulative(self, logf):
        """Cumulative integrals of positive integrands given by their logs.

        ``logf`` has shape ``(rows, nodes)``: the log of each integrand at
        the grid nodes (``-inf`` allowed). Returns a ``LogCumulative``.
        """
        return LogCumulative(self, logf)


class LogCumulative:
    """Log of ``int_{lo}^{s}`` and ``int_{s}^{hi}`` for a batch of integrands.

    ``lower`` / ``upper`` are evaluated at the grid nodes; ``at`` evaluates
    them at arbitrary points by integrating the panel interpolant.
    """

    def __init__(self, grid, logf):
        logf = np.atleast_2d(np.asarray(logf, dtype=float))
        self.grid = grid
        rows = logf.shape[0]
        n = grid.n
        _, w = gauss_legendre(n)
        lf = logf.reshape(rows, grid.npanels, n)
        piv = np.max(lf, axis=2, keepdims=True)
        piv = np.where(np.isfinite(piv), piv, 0.0)
        f = np.exp(lf - piv)
        half = grid.half[None, :, None]
        inside = np.einsum("ik,rpk->rpi", integration_matrix(n), f) * half
        ptotal = (f @ w)[:, :, None] * half
        with np.errstate(divide="ignore"):
            log_in = np.log(np.maximum(inside, 0.0)) + piv
            log_up = np.log(np.maximum(ptotal - inside, 0.0)) + piv
            log_pt = np.log(ptotal[:, :, 0]) + piv[:, :, 0]
        ninf = np.full((rows, 1), -np.inf)
        below = np.logaddexp.accumulate(log_pt, axis=1)
        self.below = np.concatenate([ninf, below[:, :-1]], axis=1)
        above = np.logaddexp.accumulate(log_pt[:, ::-1], axis=1)[:, ::-1]
        self.above = np.concatenate([above[:, 1:], ninf], axis=1)
        self.lower = np.logaddexp(self.below[:, :, None], log_in).reshape(rows, -1)
        self.upper = np.logaddexp(self.above[:, :, None], log_up).reshape(rows, -1)
        self.total = np.logaddexp.reduce(log_pt, axis=1)
        self._f = f
        self._piv = piv[:, :, 0]
        self._ptotal = ptotal[:, :, 0]

    def at(self, s):
        """``(lower, upper)`` at arbitrary points; shape ``(rows, len(s))``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        g = self.grid
        rows = self._f.shape[0]
        lower = np.empty((rows, len(s)))
        upper = np.empty((rows, len(s)))
        for i, si in enumerate(s):
            if si <= g.edges[0]:
                lower[:, i], upper[:, i] = -np.inf, self.total
                continue
            if si >= g.edges[-1]:
                lower[:, i], upper[:, i] = self.total, -np.inf
                continue
            p = min(int(np.searchsorted(g.edges, si, side="right")) - 1, g.npanels - 1)
            a, b = g.edges[p], g.edges[p + 1]
            c = integration_weights(g.n, (2.0 * si - a - b) / (b - a))[0]
            part = (self._f[:, p, :] @ c) * g.half[p]
            with np.errstate(divide="ignore"):
                lower[:, i] = np.logaddexp(self.below[:, p], np.log(np.maximum(part, 0.0)) + self._piv[:, p])
                rest = np.maximum(self._ptotal[:, p] - part, 0.0)
                upper[:, i] = np.logaddexp(self.above[:, p], np.log(rest) + self._piv[:, p])
        return lower, upper
