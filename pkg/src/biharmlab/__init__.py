"""biharmlab: numerical laboratory for singular solutions of Delta^2 u = u^p."""

__version__ = "0.1.0"

from .core import (EmdenCoeffs, Params, emden_coeffs, k_of, serrin_exponent,
                   sobolev_exponent, special_exponents, validate_params)
from .indicial import (IndicialData, WeightWindow, indicial_polynomial,
                       indicial_roots, sphere_eigenvalue, verify_ordering,
                       weight_window)

__all__ = [
    "__version__",
    "Params",
    "EmdenCoeffs",
    "validate_params",
    "k_of",
    "emden_coeffs",
    "special_exponents",
    "serrin_exponent",
    "sobolev_exponent",
    "IndicialData",
    "WeightWindow",
    "indicial_polynomial",
    "indicial_roots",
    "sphere_eigenvalue",
    "verify_ordering",
    "weight_window",
]
