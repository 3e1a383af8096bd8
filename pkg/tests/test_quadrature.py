import math

import numpy as np
import pytest

from ginprod.errors import DomainError
from ginprod.meijer import _mellin_shift
from ginprod.quadrature import (
    PanelGrid,
    QuadratureSpec,
    contour_real_part,
    gauss_legendre,
    graded_edges,
    integration_matrix,
    integration_weights,
)
from ginprod.specfun import log_gamma_complex


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(8)
    for p in range(16):
        want = 0.0 if p % 2 else 2.0 / (p + 1)
        assert np.dot(w, x ** p) == pytest.approx(want, abs=1e-14)
    assert not x.flags.writeable


def test_integration_matrix_on_polynomials():
    n = 12
    x, _ = gauss_legendre(n)
    S = integration_matrix(n)
    for p in range(n):
        want = (x ** (p + 1) - (-1.0) ** (p + 1)) / (p + 1)
        np.testing.assert_allclose(S @ x ** p, want, atol=1e-13)
    c = integration_weights(n, [-1.0, 1.0])
    np.testing.assert_allclose(c @ np.ones(n), [0.0, 2.0], atol=1e-14)


def test_graded_edges_cover_interval():
    e = graded_edges(1e-3, 0.5, 10.0)
    assert e[0] == 0 and e[-1] == pytest.approx(10.0)
    assert np.all(np.diff(e) > 0) and np.max(np.diff(e)) <= 0.5 + 1e-12


def test_log_cumulative_matches_closed_form():
    grid = PanelGrid(np.linspace(-3, 2, 11), 16)
    s = grid.nodes
    cum = grid.log_cumulative(np.vstack([s, 2 * s]))
    tot = np.array([math.exp(2) - math.exp(-3), (math.exp(4) - math.exp(-6)) / 2])
    np.testing.assert_allclose(np.exp(cum.total), tot, rtol=1e-14)
    np.testing.assert_allclose(np.exp(cum.lower[0]), np.exp(s) - math.exp(-3), rtol=1e-13)
    np.testing.assert_allclose(np.exp(cum.upper[1]), (math.exp(4) - np.exp(2 * s)) / 2, rtol=1e-13)
    lo, up = cum.at([0.1234, -5.0, 9.0])
    assert math.exp(lo[0, 0]) == pytest.approx(math.exp(0.1234) - math.exp(-3), rel=1e-13)
    assert lo[0, 1] == -np.inf and up[0, 2] == -np.inf


@pytest.mark.parametrize("z", [0.01, 0.5, 3.0, 40.0])
def test_contour_inverts_gamma_mellin(z):
    # (1/2 pi i) int_{c + iR} Gamma(t) z^-t dt = e^-z, on the saddle line
    c = _mellin_shift(1, math.log(z))
    logf = lambda eta: log_gamma_complex(c + 1j * np.asarray(eta)) - (c + 1j * np.asarray(eta)) * math.log(z)
    sign, logmag, err = contour_real_part(logf, near_scale=c, bulk_scale=1.0)
    assert sign == 1
    assert logmag == pytest.approx(-z, abs=1e-11)
    assert err < 1e-10


def test_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(DomainError):
        QuadratureSpec(nodes_per_panel=4)
    with pytest.raises(DomainError):
        QuadratureSpec(drop_threshold=5)
    assert hash(QuadratureSpec()) == hash(QuadratureSpec())
