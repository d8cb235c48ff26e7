"""Finite-precision (φ, τ)-module computations over p-adic coefficient rings."""

from .coeffs import INF, GaloisRing, PadicField, PFloat, PrecisionError, PrimeConfig
from .useries import USeries, lambda_series, c_series
from .etaring import TwoVar, eta_ring
from .phitau import PhiTauMod, ModElement, make_trivial, make_twist

__all__ = [
    "INF", "GaloisRing", "PadicField", "PFloat", "PrecisionError", "PrimeConfig",
    "USeries", "lambda_series", "c_series", "TwoVar", "eta_ring",
    "PhiTauMod", "ModElement", "make_trivial", "make_twist",
]

__version__ = "0.1.0"
