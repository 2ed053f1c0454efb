"""Correlations of eigenangles of random unitary matrices and of zeros of the
Riemann zeta function, with lower-order terms from the ratios conjecture."""
from .errors import ZetaCorrError
from .numerics import (EulerMaclaurinParams, LaurentProbe, LaurentWindow, chi_logderiv,
                       sine_kernel, z, zeta, zeta_logderiv, zeta_logderiv_prime)
from .prime_engine import PrimeContext, ThetaQuadrature, build_prime_context
from .rmt_core import correlation_rmt, determinant_oracle, jstar, ratios_average
from .zeta_core import (HeightContext, ZetaCorrelationRequest, correlation_zeta,
                        jstar_zeta_closed, jstar_zeta_general)

__version__ = "0.1.0"

__all__ = [
    "ZetaCorrError", "EulerMaclaurinParams", "LaurentProbe", "LaurentWindow", "chi_logderiv",
    "sine_kernel", "z", "zeta", "zeta_logderiv", "zeta_logderiv_prime", "PrimeContext",
    "ThetaQuadrature", "build_prime_context", "correlation_rmt", "determinant_oracle", "jstar",
    "ratios_average", "HeightContext", "ZetaCorrelationRequest", "correlation_zeta",
    "jstar_zeta_closed", "jstar_zeta_general",
]
