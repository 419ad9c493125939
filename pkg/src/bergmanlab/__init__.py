"""Numerical laboratory for composition operators on Bergman spaces of Reinhardt domains."""
from .geometry import Domain, BoundaryLayer, DomainError, ball, ellipsoid, polydisc, unit_ball
from .quadrature import DivergenceError, IntegralResult, QuadratureSpec, integrate
from .polyalg import MultiPoly
from .maps import HolomorphicMap, parse_map
from .sequences import TestFamilySpec, blowup_threshold, weak_null_report
from .operatorlab import build_matrix, compactness_diagnostic, essential_lower_bound

__all__ = [
    "Domain", "BoundaryLayer", "DomainError", "ball", "ellipsoid", "polydisc", "unit_ball",
    "DivergenceError", "IntegralResult", "QuadratureSpec", "integrate", "MultiPoly",
    "HolomorphicMap", "parse_map", "TestFamilySpec", "blowup_threshold", "weak_null_report",
    "build_matrix", "compactness_diagnostic", "essential_lower_bound",
]
__version__ = "0.1.0"
