import os
import subprocess
import sys

import numpy as np
import pytest

from ginprod import _kernels
from ginprod._kernels import _pykernels

compiled = pytest.importorskip("ginprod._kernels._ckernels")


@pytest.fixture(scope="module")
def points():
    rng = np.random.default_rng(3)
    z = rng.uniform(-20, 60, 5000) + 1j * rng.uniform(-400, 400, 5000)
    return z[np.abs(z.imag) > 1e-2]


def test_loggamma_backends_agree(points):
    a = compiled.loggamma(points)
    b = _pykernels.loggamma(points)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-11)


def test_exp_sum_backends_agree():
    rng = np.random.default_rng(4)
    g = rng.normal(size=999) + 1j * rng.normal(size=999)
    w = rng.uniform(size=999)
    assert compiled.shifted_real_exp_sum(g, w, 0.3) == pytest.approx(
        _pykernels.shifted_real_exp_sum(g, w, 0.3), rel=1e-14)


def test_default_backend_is_compiled():
    assert _kernels.BACKEND == "compiled"


def test_env_selects_python_backend():
    env = dict(os.environ, GINPROD_PURE_PYTHON="1")
    code = "import ginprod; print(ginprod.BACKEND, ginprod.coeff_a(1, 1, 1).value.to_real())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, value = out.stdout.split()
    assert name == "python"
    assert float(value) == pytest.approx(np.sqrt(np.pi / 2), rel=1e-13)
