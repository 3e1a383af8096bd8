"""Real eigenvalues of products of real Ginibre matrices.

Exact finite-N counts, moments and densities from Meijer G-type
coefficients, their large-N asymptotics, and a Monte Carlo cross-check.
"""

from ._kernels import BACKEND
from .errors import (
    DomainError,
    GinprodError,
    NumericalConsistencyError,
    QuadratureError,
    SolverError,
    UnsupportedRangeError,
)
from .meijer import CoefficientCache, coeff_a, coeff_a_oracle, coeff_I, weight_w
from .moments import (
    EnsembleParams,
    density_normalized,
    density_scaled,
    density_unscaled,
    expected_real_count,
    moment_exact,
    moment_table,
)
from .quadrature import QuadratureSpec

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CoefficientCache",
    "DomainError",
    "EnsembleParams",
    "GinprodError",
    "NumericalConsistencyError",
    "QuadratureError",
    "QuadratureSpec",
    "SolverError",
    "UnsupportedRangeError",
    "coeff_I",
    "coeff_a",
    "coeff_a_oracle",
    "density_normalized",
    "density_scaled",
    "density_unscaled",
    "expected_real_count",
    "moment_exact",
    "moment_table",
    "weight_w",
]
