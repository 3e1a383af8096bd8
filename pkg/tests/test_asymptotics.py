import math

import numpy as np
import pytest
from scipy import integrate

from ginprod import asymptotics as asy
from ginprod.errors import DomainError
from ginprod.meijer import coeff_I
from ginprod.moments import EnsembleParams, expected_real_count, moment_parts


def test_published_constants():
    assert asy.saddle_expansion(1, 0, 0).a0 == pytest.approx(math.sqrt(math.pi) * 2 ** -1.5)
    assert asy.saddle_expansion(1, 0, 0).a0 == pytest.approx(0.62666, abs=1e-5)
    e = asy.saddle_expansion(3, 1, 1)
    assert e.a1 == pytest.approx(math.pi * 2 ** -2.5 * 0.5 * math.sqrt(3))
    for l1 in range(3):
        for l2 in range(3):
            assert (asy.saddle_expansion(2, l1, l2).a1 > 0) == (l1 - l2 < 0.5)


def test_corrected_constant_differs_by_sqrt_m():
    for m in (1, 2, 3, 5):
        assert asy.leading_constant(m, corrected=True) == pytest.approx(
            asy.leading_constant(m) * math.sqrt(m))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_rescaled_chain_integral_limit(m):
    # Richardson on a0 + a1/sqrt(j): the limit is pi^(m/2) 2^(-m/2-1)
    js = np.array([400, 800, 1600, 3200])
    r = np.array([math.exp(coeff_I(m, int(j), int(j)).log_mag - asy.coeff_I_prefactor(m, int(j), 0, 0).log_mag)
                  for j in js])
    X = np.vstack([np.ones(4), js ** -0.5, 1.0 / js, js ** -1.5]).T
    c0, c1 = np.linalg.lstsq(X, r, rcond=None)[0][:2]
    assert c0 == pytest.approx(asy.leading_constant(m, corrected=True), rel=1e-4)
    assert c1 == pytest.approx(asy.saddle_expansion(m, 0, 0).a1, rel=3e-3)


def test_rescaled_I_m2_j80_corrected():
    j = 80
    r = math.exp(coeff_I(2, j, j + 1).log_mag - asy.coeff_I_prefactor(2, j, 0, 1).log_mag)
    e = asy.saddle_expansion(2, 0, 1, corrected=True)
    assert abs(r - e.a0 - e.a1 / math.sqrt(j)) < 1 / j


def test_leading_moment_sum_halves():
    # M^(1)_0 / N -> 1/2 for every m: consistent with the corrected constant
    for m in (2, 3):
        m1, m2 = moment_parts(EnsembleParams(400, m), 0)
        assert m1 / 400 == pytest.approx(0.5, abs=0.04)
        assert (m1 + m2) / 400 == pytest.approx(1.0, abs=0.002)


def test_prefactor_is_log_scaled():
    p = asy.coeff_I_prefactor(3, 500, 1, 0)
    want = -1.5 * math.log(500) - 3 * 500 * math.log(4) + 3 * math.log(2)
    assert p.sign == 1 and p.log_mag == pytest.approx(want)
    assert asy.coeff_I_asymptotic(1, 4, 0, 0) == pytest.approx(
        asy.saddle_expansion(1, 0, 0).a0 + asy.saddle_expansion(1, 0, 0).a1 / 2)


def test_phase_at_saddle():
    for m in (1, 2, 5):
        assert asy.phase_function(np.ones(m)) == pytest.approx(m * asy.PHASE_AT_SADDLE_PER_FACTOR, abs=1e-14)


def test_phase_is_maximal_at_saddle_on_boundary():
    rng = np.random.default_rng(0)
    for m in (2, 3):
        for _ in range(50):
            x = np.exp(rng.normal(scale=0.3, size=m))
            x[-1] = max(x[-1], 1.0)
            assert asy.phase_function(x) <= m * asy.PHASE_AT_SADDLE_PER_FACTOR + 1e-12


def test_hessian_matches_finite_differences():
    m, h = 4, 1e-4
    f = asy.phase_function
    H = np.empty((m, m))
    e = np.eye(m) * h
    one = np.ones(m)
    for i in range(m):
        for k in range(m):
            H[i, k] = (f(one + e[i] + e[k]) - f(one + e[i] - e[k]) - f(one - e[i] + e[k]) + f(one - e[i] - e[k])) / (4 * h * h)
    np.testing.assert_allclose(H, asy.hessian(m), atol=1e-6)


def test_hessian_negative_definite():
    for m in range(1, 21):
        assert np.all(np.linalg.eigvalsh(asy.hessian(m)) < 0)
        assert np.all(np.linalg.eigvalsh(asy.interior_hessian(m)) < 0)


def test_determinants():
    from fractions import Fraction
    assert asy.hessian(1)[0, 0] == -0.5
    for m in range(1, 41):
        assert asy.hessian_det(m) == Fraction(1, 2 ** m)
        assert asy.interior_hessian_det_exact(m) == Fraction(m + 1, 2 ** m)
        assert asy.interior_hessian_det(m) == (m + 1) / 2 ** m
    assert np.linalg.det(-asy.hessian(6)) == pytest.approx(2.0 ** -6)


def test_inverse_entries():
    for m in (1, 3, 12):
        inv = np.linalg.inv(asy.interior_hessian(m))
        assert asy.hessian_inverse_entry(m, 1, 1) == pytest.approx(-2 * m / (m + 1))
        for i in range(1, m + 1):
            for j in range(1, m + 1):
                assert abs(asy.hessian_inverse_entry(m, i, j) - inv[i - 1, j - 1]) < 1e-12
    with pytest.raises(DomainError):
        asy.hessian_inverse_entry(3, 0, 1)
    with pytest.raises(DomainError):
        asy.hessian_inverse_entry(3, 2, 4)


def test_count_asymptotic():
    assert asy.expected_count_asymptotic(EnsembleParams(100, 4)) == pytest.approx(15.957691216057308)
    assert asy.expected_count_asymptotic(EnsembleParams(2, 1)) == pytest.approx(1.1283791670955126)
    p = EnsembleParams(50, 3)
    assert asy.moment_asymptotic(p, 0) == asy.expected_count_asymptotic(p)
    assert asy.moment_asymptotic(p, 3) == 0.0
    with pytest.raises(DomainError):
        asy.moment_asymptotic(p, -2)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_limit_density_moment_duality(m):
    for k in range(9):
        val = 2 * integrate.quad(lambda x: x ** k * asy.limit_density(m, x), 0, 1, epsabs=1e-13, epsrel=1e-12)[0] if k % 2 == 0 else 0.0
        assert val == pytest.approx(asy.limit_moment(m, k), abs=1e-10)


def test_limit_cdf_and_density():
    assert asy.limit_cdf(2, 0.25) == pytest.approx(0.75)
    assert asy.limit_cdf(3, -2.0) == 0.0 and asy.limit_cdf(3, 2.0) == 1.0
    assert asy.limit_density(1, 0.0) == 0.5
    assert asy.limit_density(2, 1.5) == 0.0
    with pytest.raises(DomainError):
        asy.limit_density(2, 0.0)


def test_count_log_correction_fit_recorded():
    # the O(log N) remainder is recorded, not asserted against a value
    ns = np.array([40, 80, 160, 320])
    dev = [expected_real_count(EnsembleParams(int(n), 2)) - asy.expected_count_asymptotic(EnsembleParams(int(n), 2))
           for n in ns]
    slope, intercept = np.polyfit(np.log(ns), dev, 1)
    print(f"m=2: E N_R - sqrt(2Nm/pi) ~ {slope:.4f} log N + {intercept:.4f}")
    assert abs(slope) < 1.0
