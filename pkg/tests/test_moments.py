import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from ginprod.errors import DomainError, UnsupportedRangeError
from ginprod.moments import (
    DensityCurve,
    EnsembleParams,
    Scaling,
    density_curve,
    density_moment,
    density_model,
    density_normalized,
    density_scaled,
    density_unscaled,
    expected_real_count,
    moment_exact,
    moment_parts,
    moment_table,
    partial_signed_moment,
)
from ginprod.meijer import weight_w


def _double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def real_ginibre_count(n):
    """Closed form for m = 1, even N: sqrt(2) sum_{k < N/2} (4k-1)!!/(4k)!!."""
    s = sum(Fraction(_double_factorial(4 * k - 1), _double_factorial(4 * k)) for k in range(n // 2))
    return math.sqrt(2) * float(s)


def test_params_validation():
    with pytest.raises(DomainError, match="N must be even"):
        EnsembleParams(3, 1)
    with pytest.raises(DomainError):
        EnsembleParams(0, 1)
    with pytest.raises(DomainError):
        EnsembleParams(4, 0)
    with pytest.raises(DomainError):
        EnsembleParams(4.0, 1)
    assert EnsembleParams(16, 2).scale == 16.0


def test_smallest_case():
    assert expected_real_count(EnsembleParams(2, 1)) == pytest.approx(math.sqrt(2), abs=1e-13)


@pytest.mark.parametrize("n", [4, 10, 40, 160])
def test_m1_count_closed_form(n):
    assert expected_real_count(EnsembleParams(n, 1)) == pytest.approx(real_ginibre_count(n), rel=1e-12)


def test_odd_orders_are_exact_zero():
    rng = random.Random(1)
    for _ in range(20):
        p = EnsembleParams(2 * rng.randint(1, 200), rng.randint(1, 4))
        v = moment_exact(p, 2 * rng.randint(0, 40) + 1)
        assert type(v) is float and v == 0.0


def test_guards():
    with pytest.raises(UnsupportedRangeError):
        moment_exact(EnsembleParams(10, 5), 0)
    with pytest.raises(UnsupportedRangeError):
        moment_exact(EnsembleParams(10, 1), 10)
    with pytest.raises(UnsupportedRangeError):
        moment_exact(EnsembleParams(402, 1), 0)
    with pytest.raises(DomainError):
        moment_exact(EnsembleParams(10, 1), -2)
    with pytest.raises(DomainError):
        moment_parts(EnsembleParams(10, 1), 3)


def test_parts_positive_and_ordered():
    for m in (1, 2, 3):
        m1, m2 = moment_parts(EnsembleParams(20, m), 2)
        assert m1 > m2 > 0


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_count_increases_with_n_and_is_bounded(m):
    counts = [expected_real_count(EnsembleParams(n, m)) for n in (2, 4, 8, 16, 32)]
    assert np.all(np.diff(counts) > 0)
    assert all(0 < c <= n for c, n in zip(counts, (2, 4, 8, 16, 32)))


def test_more_factors_more_real_eigenvalues():
    c = [expected_real_count(EnsembleParams(20, m)) for m in (1, 2, 3, 4)]
    assert np.all(np.diff(c) > 0)


def test_moment_table_rows():
    p = EnsembleParams(10, 2)
    rows = moment_table(p, 4).rows()
    assert [r[0] for r in rows] == [0, 1, 2, 3, 4]
    assert rows[0][1] == expected_real_count(p)
    assert rows[1][1] == 0.0 and rows[3][1] == 0.0
    assert rows[2][3] == pytest.approx(1 / 5) and rows[4][3] == pytest.approx(1 / 9)
    with pytest.raises(DomainError):
        moment_table(p, -1)


@pytest.mark.parametrize("n,m", [(2, 1), (10, 1), (8, 2), (12, 3)])
def test_density_integrates_to_count(n, m):
    p = EnsembleParams(n, m)
    assert density_moment(p, 0) == pytest.approx(expected_real_count(p), rel=1e-10)
    assert density_moment(p, 2) == pytest.approx(moment_exact(p, 2), rel=1e-10)


def test_density_n2_m1_closed_form():
    # N = 2: rho(x) = (1/sqrt(2 pi)) [ e^{-x^2} + sqrt(pi/2) |x| e^{-x^2/2} erf(|x|/sqrt2) ]
    from scipy.special import erf
    p = EnsembleParams(2, 1)
    x = np.array([0.0, 0.3, 1.0, 2.2])
    ax = np.abs(x)
    want = (np.exp(-x ** 2) + math.sqrt(math.pi / 2) * ax * np.exp(-x ** 2 / 2) * erf(ax / math.sqrt(2))) / math.sqrt(2 * math.pi)
    np.testing.assert_allclose(density_unscaled(p, x), want, rtol=1e-12)


def test_density_scalings_consistent():
    p = EnsembleParams(16, 2)
    x = np.array([0.2, 0.7, 1.1])
    sc = density_scaled(p, x)
    np.testing.assert_allclose(sc, p.scale * density_unscaled(p, x * p.scale), rtol=1e-14)
    np.testing.assert_allclose(density_normalized(p, x), sc / expected_real_count(p), rtol=1e-14)
    assert isinstance(density_scaled(p, 0.5), float)


def test_density_even_and_signed_formula_symmetric():
    model = density_model(2, 12)
    for x in (0.3, 2.0, 9.0):
        plus = model.density_signed(12, x)
        minus = model.density_signed(12, -x)
        assert plus == pytest.approx(minus, rel=1e-10)
        assert plus == pytest.approx(model.density(12, [x])[0], rel=1e-10)


def test_density_singular_at_zero_for_products():
    with pytest.raises(DomainError):
        density_unscaled(EnsembleParams(4, 2), 0.0)
    assert density_unscaled(EnsembleParams(4, 1), 0.0) > 0


def test_partial_signed_moment_direct():
    # A_j(x) = int w(v) sgn(x - v) v^j dv for m = 2, against scipy quad
    x = 1.3
    for j in (0, 1, 3):
        f = lambda v: weight_w(2, abs(v)) * v ** j
        left = integrate.quad(f, -np.inf, -1e-12, epsrel=1e-12, limit=200)[0]
        mid = integrate.quad(f, 1e-12, x, epsrel=1e-12, limit=200)[0]
        right = integrate.quad(f, x, np.inf, epsrel=1e-12, limit=200)[0]
        want = left + mid - right
        assert partial_signed_moment(2, j, x) == pytest.approx(want, rel=1e-8, abs=1e-10)
    assert partial_signed_moment(1, 2, 0.0) == 0.0
    assert partial_signed_moment(1, 1, 0.0) == pytest.approx(-2.0, rel=1e-12)


def test_density_curve():
    p = EnsembleParams(10, 1)
    c = density_curve(p, [-0.5, 0.0, 0.5], Scaling.NORMALIZED)
    assert c.scaling is Scaling.NORMALIZED and c.values.shape == (3,)
    with pytest.raises(DomainError):
        DensityCurve(Scaling.SCALED, [0.0, 1.0], [1.0])
