"""Polynomial holomorphic maps of C^n and their boundary behaviour.

Self-map and range checks sample the boundary, then polish the worst sample
with a local optimizer.  The boundary is parametrized by radial projection
w -> center + w / gauge(w), which works for all three domain kinds.  For the
convex domains here, gauge(phi(z)) is plurisubharmonic, so its maximum over
the closure is attained on the boundary.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .geometry import Domain, as_points, boundary_distance, sample_boundary
from .polyalg import Composer, MultiPoly, determinant

SELF_MAP_TOL = 1e-9
RANGE_TOL = 1e-6


class NotSelfMapError(ValueError):
    """The map sends part of the domain outside its closure."""


class SingularMapError(ValueError):
    """A linear map that was required to be invertible is not."""


@dataclass(frozen=True)
class HolomorphicMap:
    components: tuple[MultiPoly, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a map needs at least one component")
        n = len(comps)
        if any(c.n != n for c in comps):
            raise ValueError("components must be polynomials in as many variables as there are components")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def __call__(self, z):
        pts, single = as_points(z, self.dim)
        out = np.column_stack([c.evaluate(pts) for c in self.components])
        return out[0] if single else out

    def compose(self, inner: "HolomorphicMap") -> "HolomorphicMap":
        """self o inner."""
        comp = Composer(inner.components)
        return HolomorphicMap(tuple(comp.compose(c) for c in self.components))

    @cached_property
    def jacobian_matrix(self) -> tuple[tuple[MultiPoly, ...], ...]:
        return tuple(tuple(c.derivative(k) for k in range(self.dim)) for c in self.components)

    @cached_property
    def jacobian_polynomial(self) -> MultiPoly | None:
        """det of the complex Jacobian as a polynomial (exact for n <= 3)."""
        if self.dim > 3:
            return None
        return determinant(self.jacobian_matrix)

    def is_linear(self) -> bool:
        return all(sum(a) == 1 for c in self.components for a in c.terms)

    def linear_matrix(self) -> np.ndarray:
        if not self.is_linear():
            raise ValueError("map is not linear")
        A = np.zeros((self.dim, self.dim), dtype=complex)
        for i, c in enumerate(self.components):
            for a, v in c.terms.items():
                A[i, a.index(1)] = v
        return A

    @classmethod
    def from_matrix(cls, A) -> "HolomorphicMap":
        A = np.asarray(A, dtype=complex)
        n = A.shape[0]
        return cls(tuple(
            MultiPoly(n, {tuple(int(k == j) for k in range(n)): A[i, j] for j in range(n)})
            for i in range(n)))

    def to_text(self) -> list[str]:
        return [c.to_text() for c in self.components]

    def __eq__(self, other):
        if not isinstance(other, HolomorphicMap):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)


# -- presets -----------------------------------------------------------------

def identity(n: int = 2) -> HolomorphicMap:
    return HolomorphicMap(tuple(MultiPoly.variable(n, k) for k in range(n)))


def projection(n: int = 2) -> HolomorphicMap:
    """(z1, 0, ..., 0)."""
    return HolomorphicMap((MultiPoly.variable(n, 0),) + tuple(MultiPoly.zero(n) for _ in range(n - 1)))


def scale(c: complex, n: int = 2) -> HolomorphicMap:
    return HolomorphicMap.from_matrix(complex(c) * np.eye(n))


def unitary(a: complex, b: complex) -> HolomorphicMap:
    """(a z1 + b z2, -conj(b) z1 + conj(a) z2), needs |a|^2 + |b|^2 = 1."""
    a, b = complex(a), complex(b)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-12:
        raise ValueError("unitary preset needs |a|^2 + |b|^2 = 1")
    return HolomorphicMap.from_matrix([[a, b], [-b.conjugate(), a.conjugate()]])


def swap() -> HolomorphicMap:
    return HolomorphicMap.from_matrix([[0, 1], [1, 0]])


PRESETS = ("identity", "projection", "scale:c", "unitary:a,b", "swap")


def parse_map(spec, n: int = 2) -> HolomorphicMap:
    """A preset name such as ``"scale:0.5"`` or a list of polynomial texts."""
    if isinstance(spec, HolomorphicMap):
        return spec
    if isinstance(spec, (list, tuple)):
        return HolomorphicMap(tuple(MultiPoly.from_text(t, n) for t in spec))
    name, _, arg = str(spec).partition(":")
    if name == "identity":
        return identity(n)
    if name == "projection":
        return projection(n)
    if name == "scale":
        return scale(complex(arg.replace(" ", "")), n)
    if name == "unitary":
        a, b = (complex(s.strip()) for s in arg.split(","))
        return unitary(a, b)
    if name == "swap":
        return swap()
    raise ValueError(f"unknown map preset {spec!r}; known: {', '.join(PRESETS)}")


# -- Jacobians ---------------------------------------------------------------

def jacobian_det(phi: HolomorphicMap, z):
    """det [d phi_i / d z_k] at a point or at each row of a batch."""
    pts, single = as_points(z, phi.dim)
    poly = phi.jacobian_polynomial
    if poly is not None:
        out = poly.evaluate(pts)
    else:
        J = np.stack([np.column_stack([d.evaluate(pts) for d in row]) for row in phi.jacobian_matrix], axis=1)
        out = np.linalg.det(J)
    return out[0] if single else out


@dataclass(frozen=True)
class JacobianReport:
    min_abs: float
    max_abs: float
    argmin_point: np.ndarray
    samples: int

    def to_dict(self) -> dict:
        return {"min_abs": self.min_abs, "max_abs": self.max_abs,
                "argmin_point": [[c.real, c.imag] for c in self.argmin_point],
                "samples": self.samples}


def boundary_jacobian_scan(phi: HolomorphicMap, domain: Domain, m: int, seed: int) -> JacobianReport:
    pts = sample_boundary(domain, m, seed)
    vals = np.abs(jacobian_det(phi, pts))
    i = int(np.argmin(vals))
    return JacobianReport(float(vals[i]), float(vals.max()), pts[i], m)


# -- self-map and range checks -------------------------------------------------

def clamped_distance(domain: Domain, z) -> np.ndarray:
    """Boundary distance, with points on or beyond the boundary mapped to 0."""
    pts, _ = as_points(z, domain.dim)
    g = domain.gauge(pts)
    out = np.zeros(len(pts))
    inside = g < 1.0
    if inside.any():
        out[inside] = boundary_distance(domain, pts[inside])
    return out


def _to_boundary(domain: Domain, x: np.ndarray) -> np.ndarray:
    w = x[0::2] + 1j * x[1::2]
    center = np.asarray(domain.center)
    g = domain.gauge(w + center)
    return center + w / max(g, 1e-300)


def _polish(domain: Domain, objective, starts: np.ndarray) -> float:
    """Local minimum of ``objective`` on the boundary, from a few starting points."""
    center = np.asarray(domain.center)
    best = math.inf
    for z0 in starts:
        w0 = z0 - center
        x0 = np.column_stack([w0.real, w0.imag]).ravel()
        res = minimize(lambda x: objective(_to_boundary(domain, x)[None, :])[0], x0,
                       method="Nelder-Mead",
                       options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000})
        best = min(best, float(res.fun))
    return best


def is_self_map(phi: HolomorphicMap, domain: Domain, m: int, seed: int) -> tuple[bool, float]:
    """Checks phi(bOmega) lies in the closure; returns (ok, max gauge(phi) - 1)."""
    pts = sample_boundary(domain, m, seed)
    violation = domain.gauge(phi(pts)) - 1.0
    order = np.argsort(violation)[::-1][:3]
    polished = -_polish(domain, lambda z: -(domain.gauge(phi(z)) - 1.0), pts[order])
    worst = max(float(violation.max()), polished)
    return worst <= SELF_MAP_TOL, worst


def range_compactly_contained(phi: HolomorphicMap, domain: Domain, m: int, seed: int) -> tuple[bool, float]:
    """Whether the closure of phi(Omega) stays inside Omega; returns (ok, margin)."""
    ok, worst = is_self_map(phi, domain, m, seed)
    if not ok:
        raise NotSelfMapError(f"map leaves the domain (gauge excess {worst:.3g})")
    pts = sample_boundary(domain, m, seed)
    dist = clamped_distance(domain, phi(pts))
    order = np.argsort(dist)[:3]
    margin = min(float(dist.min()), _polish(domain, lambda z: clamped_distance(domain, phi(z)), pts[order]))
    margin = max(margin, 0.0)
    return margin > RANGE_TOL, margin


def boundary_preimage_samples(phi: HolomorphicMap, domain: Domain, m: int, tol: float, seed: int) -> np.ndarray:
    """Boundary samples p with dist(phi(p), bOmega) < tol."""
    pts = sample_boundary(domain, m, seed)
    return pts[clamped_distance(domain, phi(pts)) < tol]


# -- conjugation -------------------------------------------------------------

def invert_linear(B: HolomorphicMap) -> HolomorphicMap:
    A = B.linear_matrix()
    if abs(np.linalg.det(A)) < 1e-14:
        raise SingularMapError("linear map has zero determinant")
    return HolomorphicMap.from_matrix(np.linalg.inv(A))


def conjugate(phi: HolomorphicMap, B: HolomorphicMap) -> HolomorphicMap:
    """B^-1 o phi o B for an invertible linear B."""
    if not B.is_linear():
        raise ValueError("conjugating map must be linear")
    return invert_linear(B).compose(phi.compose(B))


def random_map(rng: np.random.Generator, n: int = 2, degree: int = 2, integer: bool = False) -> HolomorphicMap:
    """Random dense polynomial map, used by property tests and examples."""
    comps = []
    for _ in range(n):
        terms = {}
        for total in range(degree + 1):
            for a in itertools.product(range(total + 1), repeat=n):
                if sum(a) == total:
                    if integer:
                        terms[a] = complex(*rng.integers(-3, 4, size=2))
                    else:
                        terms[a] = complex(*rng.normal(size=2))
        comps.append(MultiPoly(n, terms))
    return HolomorphicMap(tuple(comps))
