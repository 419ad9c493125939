"""Singular test families with a boundary pole.

Two families of the form h(z) = alpha * w^-beta:

* ``f``: w = 1 - z1 on a domain inside {Re z1 < 1}; pole at (1, 0, ..., 0).
  (1 - z1)^-beta has the same modulus as (z1 - 1)^-beta, and the principal
  branch of w is cut along w <= 0, i.e. z1 >= 1, away from the domain.
* ``g``: w = z1 on a domain inside {Re z1 > 0} (for example the unit ball
  translated by (1, 0)); pole at the origin.

The members indexed by j use beta_j = 1 - 1/j.  ``alpha`` is chosen
numerically so the member has unit A^2 norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._workers import pmap
from .geometry import Domain, DomainError, sample_exhaustion
from .quadrature import IntegralResult, QuadratureSpec, integrate, volume

FAMILIES = ("f", "g")
K_EPS_SAMPLES = 10_000
# alpha_j^2 extrapolated to j = infinity below this fraction of the last alpha_j^2 counts as -> 0
VANISHING_FRACTION = 0.25


class BranchCutError(ValueError):
    """Argument lies on the closed negative real axis."""


class NormalizationError(ArithmeticError):
    """The family member is not square integrable (norm flagged divergent)."""


def principal_power(w, beta: float):
    """w^-beta = exp(-beta Log w) on the principal branch."""
    arr = np.asarray(w, dtype=complex)
    if np.any((arr.imag == 0) & (arr.real <= 0)):
        raise BranchCutError("principal power is undefined on the closed negative real axis")
    out = np.exp(-beta * np.log(arr))
    return out.item() if out.ndim == 0 else out


def _check_halfplane(domain: Domain, family: str):
    c1, a1 = domain.center[0], domain.axes[0]
    if family == "f" and c1.real + a1 > 1 + 1e-12:
        raise DomainError(f"{domain} is not contained in {{Re z1 < 1}}")
    if family == "g" and c1.real - a1 < -1e-12:
        raise DomainError(f"{domain} is not contained in {{Re z1 > 0}}")


def make_f(beta: float, domain: Domain):
    """Unnormalized z -> (1 - z1)^-beta."""
    _check_halfplane(domain, "f")
    return lambda z: principal_power(1 - np.atleast_2d(z)[:, 0], beta)


def make_g(beta: float, shifted_domain: Domain):
    """Unnormalized z -> z1^-beta."""
    _check_halfplane(shifted_domain, "g")
    return lambda z: principal_power(np.atleast_2d(z)[:, 0], beta)


def beta_from_index(j: int) -> float:
    if j < 2:
        raise ValueError("family index j must be at least 2")
    return 1.0 - 1.0 / j


@dataclass(frozen=True)
class TestFamilySpec:
    __test__ = False  # not a pytest class

    family: str
    beta: float
    domain: Domain
    alpha: float | None = None
    j: int | None = None
    norm_error: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if not 0 <= self.beta < 2:
            raise ValueError("beta must lie in [0, 2)")
        if self.j is not None and abs(self.beta - beta_from_index(self.j)) > 1e-15:
            raise ValueError("beta does not match the index j")
        _check_halfplane(self.domain, self.family)

    @classmethod
    def from_index(cls, family: str, j: int, domain: Domain) -> "TestFamilySpec":
        return cls(family, beta_from_index(j), domain, j=j)

    def at_index(self, j: int) -> "TestFamilySpec":
        return TestFamilySpec.from_index(self.family, j, self.domain)

    def at_beta(self, beta: float) -> "TestFamilySpec":
        return TestFamilySpec(self.family, beta, self.domain)

    @property
    def pole(self) -> tuple[complex, ...]:
        first = 1.0 if self.family == "f" else 0.0
        return (complex(first),) + (0j,) * (self.domain.dim - 1)

    def unnormalized(self):
        if self.family == "f":
            return make_f(self.beta, self.domain)
        return make_g(self.beta, self.domain)

    def function(self):
        """The normalized member alpha * w^-beta."""
        if self.alpha is None:
            raise ValueError("family member has not been normalized")
        h = self.unnormalized()
        alpha = self.alpha
        return lambda z: alpha * h(z)

    def quadrature(self, quad: QuadratureSpec) -> QuadratureSpec:
        """Stratified specs without a focus get the pole as focus."""
        if quad.method == "stratified" and quad.focus is None:
            return quad.with_focus(self.pole[0])
        return quad


def squared_norm(spec: TestFamilySpec, quad: QuadratureSpec, *, normalized: bool = False) -> IntegralResult:
    h = spec.function() if normalized else spec.unnormalized()
    return integrate(spec.domain, lambda z: np.abs(h(z)) ** 2, spec.quadrature(quad))


def normalize(spec: TestFamilySpec, quad: QuadratureSpec) -> TestFamilySpec:
    """Copy of ``spec`` with alpha = 1 / ||w^-beta||."""
    res = squared_norm(spec, quad)
    if res.divergent or not res.value > 0:
        raise NormalizationError(
            f"{spec.family}-family with beta={spec.beta:g} on {spec.domain} is not normalizable "
            f"({res.diagnostics})")
    alpha = 1.0 / math.sqrt(res.value)
    # relative error of alpha is half that of the squared norm
    return replace(spec, alpha=alpha, norm_error=0.5 * res.std_error / res.value)


@dataclass
class WeakNullReport:
    family: str
    domain: str
    eps: float
    js: list
    betas: list
    alphas: list
    norms: list
    norm_errors: list
    sups: list
    alpha_strictly_decreasing: bool
    sup_strictly_decreasing: bool
    alpha_limit_sq: float | None
    alpha_to_zero: bool | None
    sup_to_zero: bool | None
    weak_null: bool | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def weak_null_report(template: TestFamilySpec, j_list=None, eps: float = 0.2,
                     quad: QuadratureSpec | None = None, betas=None) -> WeakNullReport:
    """Norms, normalizations and sup over K_eps along a list of family members.

    Each member is normalized with ``quad`` and its norm re-measured with an
    independent seed.  Whether alpha_j -> 0 is judged by extrapolating
    alpha_j^2 linearly in 1 - beta_j (= 1/j) from the last two members.
    """
    quad = quad or QuadratureSpec()
    if betas is None:
        members = [template.at_index(j) for j in j_list]
    else:
        members = [template.at_beta(b) for b in betas]
    kpts = sample_exhaustion(template.domain, eps, K_EPS_SAMPLES, quad.seed)
    check = quad.reseeded()

    def run(member):
        normed = normalize(member, quad)
        again = squared_norm(normed, check, normalized=True)
        sup = float(np.abs(normed.function()(kpts)).max())
        return normed, again, sup

    rows = pmap(run, members)
    alphas = [r[0].alpha for r in rows]
    sups = [r[2] for r in rows]
    norms = [math.sqrt(r[1].value) for r in rows]
    # alpha and the re-measured integral are independent; relative errors add in quadrature
    norm_errors = [n * math.hypot(r[0].norm_error, 0.5 * r[1].std_error / max(r[1].value, 1e-300))
                   for n, r in zip(norms, rows)]
    b = [m.beta for m in members]

    def strictly_decreasing(xs):
        return all(x > y for x, y in zip(xs, xs[1:]))

    limit = alpha_to_zero = sup_to_zero = weak_null = None
    if len(members) >= 2:
        x0, x1 = 1 - b[-2], 1 - b[-1]
        y0, y1 = alphas[-2] ** 2, alphas[-1] ** 2
        limit = y1 - x1 * (y0 - y1) / (x0 - x1) if x0 != x1 else y1
        alpha_to_zero = limit < VANISHING_FRACTION * y1
        # sup over K_eps is alpha_j times a factor bounded in j, so it vanishes
        # with alpha_j once the trailing values decrease
        sup_to_zero = alpha_to_zero and sups[-1] < sups[-2]
        weak_null = alpha_to_zero and sup_to_zero
    return WeakNullReport(
        template.family, str(template.domain), eps,
        [m.j for m in members], b, alphas, norms, norm_errors, sups,
        strictly_decreasing(alphas), strictly_decreasing(sups),
        limit, alpha_to_zero, sup_to_zero, weak_null)


@dataclass
class ThresholdResult:
    domain: str
    betas: list
    norm_sq: list
    std_error: list
    divergent: list
    beta_star: float | None
    consistent: bool
    diagnostics: list

    def csv_rows(self):
        for b, v, e, d in zip(self.betas, self.norm_sq, self.std_error, self.divergent):
            yield b, v, e, d

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def blowup_threshold(domain: Domain, beta_grid, quad: QuadratureSpec) -> ThresholdResult:
    """Squared norm of (1 - z1)^-beta along a grid of exponents, with divergence flags.

    beta* is the midpoint between the largest grid point judged finite and
    the smallest judged divergent; ``consistent`` says whether every finite
    point precedes every divergent one.
    """
    grid = [float(b) for b in beta_grid]
    if any(not 0 <= b < 2 for b in grid) or any(x >= y for x, y in zip(grid, grid[1:])):
        raise ValueError("beta grid must be strictly increasing inside [0, 2)")
    template = TestFamilySpec("f", grid[0], domain)

    def run(beta):
        if beta == 0:
            v = volume(domain)
            return IntegralResult(v, 0.0, quad.samples)
        return squared_norm(template.at_beta(beta), quad)

    results = pmap(run, grid)
    flags = [r.divergent for r in results]
    finite = [b for b, d in zip(grid, flags) if not d]
    div = [b for b, d in zip(grid, flags) if d]
    beta_star = 0.5 * (max(finite) + min(div)) if finite and div else None
    consistent = not (finite and div) or max(finite) < min(div)
    return ThresholdResult(
        str(domain), grid,
        [None if r.divergent else float(r.value) for r in results],
        [None if r.divergent else float(r.std_error) for r in results],
        flags, beta_star, consistent, [r.diagnostics for r in results])
