"""Finite compressions of composition operators and compactness diagnostics.

The compression at degree d is the matrix of P_d C_phi P_d in the
orthonormal monomial basis {e_alpha : |alpha| <= d}:

    M[beta, alpha] = <e_alpha o phi, e_beta>.

For polynomial phi, e_alpha o phi expands exactly, and orthogonality of
monomials gives M[beta, alpha] = c_beta ||z^beta|| / ||z^alpha||, where c_beta
is the coefficient of z^beta in z^alpha o phi.  Basis order is graded-lex,
so the degree-d compression is the leading block of every larger one.

A finite compression cannot certify compactness.  The diagnostic counts
singular values above a threshold tau at several degrees: a count that keeps
growing signals an operator that stays large on ever more directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._workers import pmap
from .bergman import BasisElement, enumerate_basis, monomial_norm_sq
from .geometry import Domain, DomainError, boundary_distance, sample_boundary
from .maps import (HolomorphicMap, NotSelfMapError, boundary_jacobian_scan, boundary_preimage_samples,
                   conjugate, identity, invert_linear, is_self_map, jacobian_det, projection,
                   scale, swap, unitary)
from .polyalg import Composer, MultiPoly
from .quadrature import QuadratureSpec, integrate
from .sequences import TestFamilySpec, normalize, squared_norm

MAX_BASIS = 10_000
DEFAULT_TAU = 0.9
# relative change allowed in the leading singular values between degrees
STABILITY_TOL = 1e-3
SELF_MAP_SAMPLES = 2000

COMPACT = "COMPACT_LIKELY"
NONCOMPACT = "NONCOMPACT_LIKELY"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class OperatorMatrix:
    degree: int
    basis: list[BasisElement]
    entries: np.ndarray
    map: HolomorphicMap
    domain: Domain
    exact: bool
    std_error: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.basis)


def _check_map(phi: HolomorphicMap, domain: Domain):
    if phi.dim != domain.dim:
        raise ValueError("map and domain dimensions differ")
    ok, worst = is_self_map(phi, domain, SELF_MAP_SAMPLES, 0)
    if not ok:
        raise NotSelfMapError(f"map is not a self-map of {domain} (gauge excess {worst:.3g})")


def build_matrix(phi: HolomorphicMap, domain: Domain, d: int, quad: QuadratureSpec | None = None,
                 exact: bool = True) -> OperatorMatrix:
    """Compression of C_phi at total degree d.

    ``exact=True`` expands each e_alpha o phi with polyalg; otherwise every
    column is a Monte Carlo estimate of the inner products using ``quad``.
    """
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if math.comb(domain.dim + d, d) > MAX_BASIS:
        raise ValueError(f"basis at degree {d} exceeds {MAX_BASIS} elements")
    _check_map(phi, domain)
    basis = enumerate_basis(domain.dim, d, domain)
    if exact:
        return OperatorMatrix(d, basis, _exact_entries(phi, basis), phi, domain, True)
    if quad is None:
        raise ValueError("quadrature entries need a QuadratureSpec")
    entries, se = _quadrature_entries(phi, domain, basis, quad)
    return OperatorMatrix(d, basis, entries, phi, domain, False, se)


def _exact_entries(phi: HolomorphicMap, basis: list[BasisElement]) -> np.ndarray:
    comp = Composer(phi.components)
    index = {b.alpha: i for i, b in enumerate(basis)}
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, e in enumerate(basis):
        image = comp.compose(MultiPoly.monomial(e.alpha))
        for gamma, c in image.terms.items():
            row = index.get(gamma)
            if row is not None:
                M[row, col] = c * basis[row].norm / e.norm
    return M


def _quadrature_entries(phi, domain, basis, quad):
    def column(e):
        def integrand(z):
            image = e(phi(z))
            return image[:, None] * np.conj(np.column_stack([b(z) for b in basis]))
        res = integrate(domain, integrand, quad).require_finite("matrix column")
        return np.atleast_1d(res.value), np.atleast_1d(res.std_error)

    cols = pmap(column, basis)
    return np.column_stack([c[0] for c in cols]), np.column_stack([c[1] for c in cols])


def quadrature_entry(phi: HolomorphicMap, domain: Domain, alpha, beta, quad: QuadratureSpec):
    """Monte Carlo estimate of <e_alpha o phi, e_beta> and its standard error."""
    ea = BasisElement(tuple(alpha), monomial_norm_sq(alpha, domain), domain)
    eb = BasisElement(tuple(beta), monomial_norm_sq(beta, domain), domain)
    res = integrate(domain, lambda z: ea(phi(z)) * np.conj(eb(z)), quad).require_finite()
    return res.value, res.std_error


def singular_values(M: OperatorMatrix | np.ndarray) -> np.ndarray:
    A = M.entries if isinstance(M, OperatorMatrix) else np.asarray(M)
    if not np.all(np.isfinite(A)):
        raise FloatingPointError("operator matrix has non-finite entries")
    s = np.linalg.svd(A, compute_uv=False)
    if not np.all(np.isfinite(s)):
        raise FloatingPointError("SVD returned non-finite singular values")
    return np.sort(s)[::-1]


@dataclass
class CompactnessDiagnostic:
    degrees: list[int]
    singular_profiles: list[np.ndarray]
    tau: float
    plateau_counts: list[int]
    verdict: str
    essential_lower_bound: float | None = None
    map_text: list[str] = field(default_factory=list)
    domain: str = ""

    def plateau_count(self, tau: float) -> list[int]:
        return [int((s >= tau).sum()) for s in self.singular_profiles]

    def profile_rows(self):
        for d, s in zip(self.degrees, self.singular_profiles):
            for k, v in enumerate(s):
                yield d, k, float(v)

    def to_dict(self) -> dict:
        return {"map": self.map_text, "domain": self.domain, "degrees": self.degrees, "tau": self.tau,
                "plateau_counts": self.plateau_counts, "verdict": self.verdict,
                "essential_lower_bound": self.essential_lower_bound}


def classify(profiles: list[np.ndarray], tau: float) -> tuple[list[int], str]:
    """Verdict from singular-value profiles at increasing degrees."""
    counts = [int((s >= tau).sum()) for s in profiles]
    growing = len(counts) >= 3 and all(a < b for a, b in zip(counts, counts[1:]))
    if growing:
        return counts, NONCOMPACT
    if len(set(counts)) == 1:
        lead = max(counts[0], 1) + 1
        stable = True
        for s0, s1 in zip(profiles, profiles[1:]):
            m = min(lead, len(s0), len(s1))
            scale_ = np.maximum(np.abs(s1[:m]), 1e-300)
            if np.any(np.abs(s1[:m] - s0[:m]) / scale_ > STABILITY_TOL):
                stable = False
        if stable:
            return counts, COMPACT
    return counts, INCONCLUSIVE


def compactness_diagnostic(phi: HolomorphicMap, domain: Domain, degrees, tau: float = DEFAULT_TAU,
                           quad: QuadratureSpec | None = None, family: TestFamilySpec | None = None,
                           j_list=None) -> CompactnessDiagnostic:
    degrees = [int(d) for d in degrees]
    if len(degrees) < 2 or any(a >= b for a, b in zip(degrees, degrees[1:])):
        raise ValueError("need at least two strictly increasing degrees")
    profiles = pmap(lambda d: singular_values(build_matrix(phi, domain, d)), degrees)
    counts, verdict = classify(profiles, tau)
    bound = None
    if family is not None:
        bound = essential_lower_bound(phi, family, j_list, quad or QuadratureSpec()).value
    return CompactnessDiagnostic(degrees, profiles, tau, counts, verdict, bound,
                                 phi.to_text(), str(domain))


@dataclass
class EssentialBound:
    value: float
    js: list
    betas: list
    alphas: list
    composed_norms: list
    std_errors: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def essential_lower_bound(phi: HolomorphicMap, family: TestFamilySpec, j_list=None,
                          quad: QuadratureSpec | None = None, betas=None) -> EssentialBound:
    """min over the family of ||h_j o phi||, each h_j normalized to unit norm.

    The composed norms use the same quadrature as the normalization, so
    phi = identity gives exactly 1.
    """
    quad = quad or QuadratureSpec()
    if betas is None:
        members = [family.at_index(j) for j in j_list]
    else:
        members = [family.at_beta(b) for b in betas]

    def run(member):
        normed = normalize(member, quad)
        h = normed.function()
        if phi == identity(phi.dim):
            res = squared_norm(normed, quad, normalized=True)
        else:
            res = integrate(normed.domain, lambda z: np.abs(h(phi(z))) ** 2, normed.quadrature(quad))
        res.require_finite("composed norm")
        value = math.sqrt(res.value)
        return normed, value, 0.5 * res.std_error / max(value, 1e-300)

    rows = pmap(run, members)
    norms = [r[1] for r in rows]
    return EssentialBound(min(norms), [m.j for m in members], [m.beta for m in members],
                          [r[0].alpha for r in rows], norms, [r[2] for r in rows])


@dataclass
class RatioResult:
    value: float
    std_error: float
    full_norm_sq: float
    layer_norm_sq: float


def reverse_carleson_ratio(f, domain: Domain, delta: float, quad: QuadratureSpec) -> RatioResult:
    """||f||_{2, Omega} / ||f||_{2, U_delta}, U_delta the delta-layer at the boundary.

    Both integrals come from one sample, and the standard error follows from
    their joint covariance by the delta method.
    """
    if not 0 < delta < domain.inradius:
        raise DomainError(f"delta must lie in (0, {domain.inradius})")

    def integrand(z):
        v = np.abs(f(z)) ** 2
        return np.column_stack([v, v * (boundary_distance(domain, z) < delta)])

    res = integrate(domain, integrand, quad).require_finite()
    full, layer = (float(x) for x in res.value)
    if layer <= 0:
        raise ZeroDivisionError("norm over the boundary layer is zero")
    q = full / layer
    grad = np.array([1 / layer, -full / layer ** 2])
    var_q = float(grad @ res.cov @ grad)
    ratio = math.sqrt(q)
    return RatioResult(ratio, 0.5 * math.sqrt(max(var_q, 0.0)) / ratio, full, layer)


# -- change of variables between linearly equivalent domains ---------------------

def _check_bijection(B: HolomorphicMap, dom1: Domain, dom2: Domain, m: int = 2000, tol: float = 1e-9):
    Binv = invert_linear(B)
    fwd = dom2.gauge(B(sample_boundary(dom1, m, 11)))
    back = dom1.gauge(Binv(sample_boundary(dom2, m, 12)))
    center_ok = np.allclose(B(np.asarray(dom1.center)), np.asarray(dom2.center), atol=tol)
    if not (center_ok and np.all(np.abs(fwd - 1) < tol) and np.all(np.abs(back - 1) < tol)):
        raise DomainError("B does not map the first domain onto the second")
    return Binv


@dataclass
class ChangeOfVariables:
    lhs: float
    rhs: float
    lhs_error: float
    rhs_error: float
    residual: float


def change_of_variables_check(h, B: HolomorphicMap, dom1: Domain, dom2: Domain,
                              quad: QuadratureSpec) -> ChangeOfVariables:
    """Compares ||h o B||^2 on dom1 with the integral of |h|^2 |J(B^-1)|^2 over dom2."""
    if not B.is_linear():
        raise ValueError("B must be linear")
    Binv = _check_bijection(B, dom1, dom2)
    jac2 = abs(np.linalg.det(Binv.linear_matrix())) ** 2
    lhs = integrate(dom1, lambda z: np.abs(h(B(z))) ** 2, quad).require_finite()
    rhs = integrate(dom2, lambda z: np.abs(h(z)) ** 2 * jac2, quad).require_finite()
    top = max(abs(lhs.value), abs(rhs.value))
    residual = abs(lhs.value - rhs.value) / top if top > 0 else 0.0
    return ChangeOfVariables(lhs.value, rhs.value, lhs.std_error, rhs.std_error, residual)


@dataclass
class ConjugationCheck:
    original: CompactnessDiagnostic
    conjugated: CompactnessDiagnostic
    agree: bool
    max_profile_gap: float


def conjugation_invariance_check(phi: HolomorphicMap, B: HolomorphicMap, dom1: Domain, dom2: Domain,
                                 degrees, tau: float = DEFAULT_TAU) -> ConjugationCheck:
    """Diagnoses C_phi on dom2 and C_{B^-1 phi B} on dom1.

    The monomial basis of dom1 is the normalized pullback of the one on dom2
    when B is diagonal, so both compressions are computed exactly.
    """
    _check_bijection(B, dom1, dom2)
    psi = conjugate(phi, B)
    d2 = compactness_diagnostic(phi, dom2, degrees, tau)
    d1 = compactness_diagnostic(psi, dom1, degrees, tau)
    gap = max(float(np.abs(a - b).max()) for a, b in zip(d1.singular_profiles, d2.singular_profiles))
    return ConjugationCheck(d2, d1, d1.verdict == d2.verdict, gap)


# -- the catalog of named maps and the boundary cross tabulation -------------

def catalog(n: int = 2) -> dict[str, HolomorphicMap]:
    maps = {"identity": identity(n), "projection": projection(n), "scale:0.5": scale(0.5, n),
            "scale:0.9": scale(0.9, n)}
    if n == 2:
        maps["unitary:0.6,0.8"] = unitary(0.6, 0.8)
        maps["swap"] = swap()
    return maps


@dataclass
class CrossTabRow:
    name: str
    verdict: str
    preimage_count: int
    min_abs_jacobian_on_preimage: float | None
    boundary_min_abs_jacobian: float
    consistent: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def singular_preimage_crosstab(domain: Domain, maps: dict[str, HolomorphicMap], degrees, tau: float = DEFAULT_TAU,
                               m: int = 20_000, tol: float = 1e-3, seed: int = 0,
                               jac_tol: float = 1e-6) -> list[CrossTabRow]:
    """Verdict against boundary preimage and boundary Jacobian, one row per map.

    A row is consistent with the necessary condition unless the map looks
    compact while some sampled boundary preimage point has |J| >= jac_tol.
    """
    rows = []
    for name, phi in maps.items():
        diag = compactness_diagnostic(phi, domain, degrees, tau)
        pre = boundary_preimage_samples(phi, domain, m, tol, seed)
        jmin = float(np.abs(jacobian_det(phi, pre)).min()) if len(pre) else None
        scan = boundary_jacobian_scan(phi, domain, m, seed)
        consistent = not (diag.verdict == COMPACT and jmin is not None and jmin >= jac_tol)
        rows.append(CrossTabRow(name, diag.verdict, len(pre), jmin, scan.min_abs, consistent))
    return rows
