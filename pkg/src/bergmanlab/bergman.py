"""A^p norms, the A^2 inner product and the monomial basis.

Ball, polydisc and ellipsoid are all Reinhardt domains, so distinct monomials
are orthogonal in A^2 and the normalized monomials form an orthonormal basis
with a diagonal, exactly known Gram matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Domain, DomainError
from .polyalg import MultiIndex, multi_indices
from .quadrature import IntegralResult, QuadratureSpec, integrate


@dataclass(frozen=True)
class BasisElement:
    alpha: MultiIndex
    norm_sq: float
    domain: Domain

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    def __call__(self, z):
        """e_alpha = z^alpha / ||z^alpha|| at the rows of ``z``."""
        return monomial_values(z, self.alpha) / self.norm


def monomial_values(z, alpha: MultiIndex) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(z, dtype=complex))
    out = np.ones(len(pts), dtype=complex)
    for k, e in enumerate(alpha):
        if e:
            out = out * pts[:, k] ** e
    return out


def monomial_norm_sq(alpha: MultiIndex, domain: Domain) -> float:
    """||z^alpha||^2 in A^2(domain) for a domain centered at the origin.

    ball/ellipsoid: pi^n alpha! / (n + |alpha|)!  times prod a_k^(2 alpha_k + 2)
    polydisc:       prod pi r_k^(2 alpha_k + 2) / (alpha_k + 1)
    The ellipsoid value is the ball value pushed through the diagonal map
    z -> (a_k z_k), whose real Jacobian is prod a_k^2.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != domain.dim or any(a < 0 for a in alpha):
        raise ValueError(f"bad multi-index {alpha} for dimension {domain.dim}")
    if not domain.is_centered:
        raise DomainError("monomial norms are tabulated for domains centered at the origin")
    axes = domain.axes
    if domain.kind == "polydisc":
        return math.prod(math.pi * r ** (2 * a + 2) / (a + 1) for r, a in zip(axes, alpha))
    n = domain.dim
    ball_value = math.pi ** n * math.prod(math.factorial(a) for a in alpha) / math.factorial(n + sum(alpha))
    return ball_value * math.prod(r ** (2 * a + 2) for r, a in zip(axes, alpha))


def enumerate_basis(n: int, d: int, domain: Domain) -> list[BasisElement]:
    if n != domain.dim:
        raise ValueError("basis dimension must match the domain")
    return [BasisElement(a, monomial_norm_sq(a, domain), domain) for a in multi_indices(n, d)]


def norm_p(f, domain: Domain, p: float, spec: QuadratureSpec) -> IntegralResult:
    """(integral of |f|^p dV)^(1/p), with the standard error carried through."""
    if not p >= 1:
        raise ValueError("p must be at least 1")
    raw = integrate(domain, lambda z: np.abs(f(z)) ** p, spec)
    if raw.divergent:
        return IntegralResult(math.nan, math.nan, raw.samples_used, True, raw.diagnostics)
    value = raw.value ** (1 / p)
    se = raw.std_error * value / (p * raw.value) if raw.value > 0 else 0.0
    return IntegralResult(value, se, raw.samples_used, False, raw.diagnostics)


def inner_product(f, g, domain: Domain, spec: QuadratureSpec) -> IntegralResult:
    """<f, g> = integral of f conj(g) dV."""
    return integrate(domain, lambda z: f(z) * np.conj(g(z)), spec)
