"""Information geometry on the finite-dimensional Gaussian space.

Hermite calculus and Gauss-Hermite quadrature, Young functions and Orlicz
norms, the exponential statistical bundle with its transports and charts,
Gaussian Orlicz-Sobolev inequalities, and the Hyvarinen, Otto and Boltzmann
applications.
"""
__version__ = "0.1.0"

from .bundle import (Curve, FiberVector, acceleration, duality_check, e_transport, geodesic, m_transport,
                     mixture_geodesic, velocity)
from .expfamily import (Density, ExpDensity, InadmissibleTilt, MixtureDensity, cumulant, exp_chart,
                        exp_chart_inverse, membership_check, mix_chart)
from .fields import BoundednessCertificate, ConstantField, FunctionField, ScalarField, grad_norm_field
from .fieldspec import ExprField, ParseError, parse, parse_field, to_text
from .hermite import HermiteField, multi_indices
from .orlicz import dual_norm, luxemburg_norm, tail_fit
from .quadrature import IntegrandOverflow, QuadratureGrid, gauss_grid
from .sampling import GaussianSampler
from .young import YoungFunction, conjugate, young

__all__ = [
    "Curve", "FiberVector", "acceleration", "duality_check", "e_transport", "geodesic", "m_transport",
    "mixture_geodesic", "velocity", "Density", "ExpDensity", "InadmissibleTilt", "MixtureDensity", "cumulant",
    "exp_chart", "exp_chart_inverse", "membership_check", "mix_chart", "BoundednessCertificate", "ConstantField",
    "FunctionField", "ScalarField", "grad_norm_field", "ExprField", "ParseError", "parse", "parse_field", "to_text",
    "HermiteField", "multi_indices", "dual_norm", "luxemburg_norm", "tail_fit", "IntegrandOverflow",
    "QuadratureGrid", "gauss_grid", "GaussianSampler", "YoungFunction", "conjugate", "young",
]
