"""Bounded convex domains in C^n: ball, polydisc and ellipsoid.

All three shapes are stored the same way, as a vector of per-coordinate
semiaxes plus an optional center.  A ball is an ellipsoid with equal axes;
the kind is kept separately because the boundary distance has a closed form
for the ball and the polydisc.

Points are complex numpy arrays.  Functions accept a single point of shape
``(n,)`` or a batch of shape ``(m, n)`` and return a scalar or an ``(m,)``
array accordingly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("ball", "polydisc", "ellipsoid")

# points with gauge within this of 1 count as boundary points
CLOSURE_TOL = 1e-12


class DomainError(ValueError):
    """Invalid domain parameters or a point outside the admissible region."""


@dataclass(frozen=True)
class Domain:
    kind: str
    axes: tuple[float, ...]
    center: tuple[complex, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}")
        axes = tuple(float(a) for a in self.axes)
        if len(axes) < 2:
            raise DomainError("domains must have dimension n >= 2")
        if not all(a > 0 and math.isfinite(a) for a in axes):
            raise DomainError(f"radii/semiaxes must be positive, got {axes}")
        if self.kind == "ball" and len(set(axes)) != 1:
            raise DomainError("a ball has a single radius")
        center = tuple(complex(c) for c in self.center) or (0j,) * len(axes)
        if len(center) != len(axes):
            raise DomainError("center dimension does not match the domain")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def inradius(self) -> float:
        return min(self.axes)

    @property
    def is_centered(self) -> bool:
        return all(c == 0 for c in self.center)

    def translated(self, shift) -> "Domain":
        shift = tuple(complex(s) for s in shift)
        if len(shift) != self.dim:
            raise DomainError("shift dimension does not match the domain")
        return Domain(self.kind, self.axes, tuple(c + s for c, s in zip(self.center, shift)))

    def gauge(self, z):
        """Minkowski gauge about the center: < 1 inside, = 1 on the boundary."""
        pts, single = as_points(z, self.dim)
        w = np.abs(pts - np.asarray(self.center)) / np.asarray(self.axes)
        if self.kind == "polydisc":
            g = w.max(axis=1)
        else:
            g = np.sqrt((w ** 2).sum(axis=1))
        return g[0] if single else g

    def to_dict(self) -> dict:
        if self.kind == "ball":
            params = [self.axes[0]] if self.axes[0] != 1.0 else []
        else:
            params = list(self.axes)
        out = {"kind": self.kind, "dim": self.dim, "params": params}
        if not self.is_centered:
            out["center"] = [[c.real, c.imag] for c in self.center]
        return out

    @classmethod
    def from_dict(cls, spec: dict) -> "Domain":
        kind = spec["kind"]
        n = int(spec.get("dim", 2))
        params = [float(p) for p in spec.get("params", [])]
        if kind == "ball":
            if len(params) > 1:
                raise DomainError("ball takes at most one parameter (radius)")
            axes = (params[0] if params else 1.0,) * n
        else:
            if len(params) != n:
                raise DomainError(f"{kind} needs {n} params, got {len(params)}")
            axes = tuple(params)
        center = tuple(complex(re, im) for re, im in spec.get("center", []))
        return cls(kind, axes, center)

    def __str__(self) -> str:
        if self.kind == "ball":
            name = f"UnitBall({self.dim})" if self.axes[0] == 1.0 else f"Ball({self.dim}, r={self.axes[0]:g})"
        else:
            name = f"{self.kind.capitalize()}({', '.join(f'{a:g}' for a in self.axes)})"
        if not self.is_centered:
            name += f" + {tuple(self.center)}"
        return name


def unit_ball(n: int = 2) -> Domain:
    return Domain("ball", (1.0,) * n)


def ball(n: int, radius: float) -> Domain:
    return Domain("ball", (radius,) * n)


def polydisc(*radii: float) -> Domain:
    return Domain("polydisc", radii)


def ellipsoid(*semiaxes: float) -> Domain:
    return Domain("ellipsoid", semiaxes)


@dataclass(frozen=True)
class BoundaryLayer:
    """The set of points of ``parent`` within distance ``delta`` of its boundary."""

    parent: Domain
    delta: float

    def __post_init__(self):
        if not 0 < self.delta < self.parent.inradius:
            raise DomainError(
                f"layer width must lie in (0, {self.parent.inradius}), got {self.delta}")


def as_points(z, n: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise DomainError(f"expected points of dimension {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points must have finite coordinates")
    return pts, single


def _unpack(values: np.ndarray, single: bool):
    return values[0].item() if single else values


def contains(domain: Domain, z):
    """True iff ``z`` lies in the open domain."""
    g = np.atleast_1d(domain.gauge(z))
    return _unpack(g < 1.0, np.ndim(z) == 1)


def boundary_distance(domain: Domain, z):
    """Euclidean distance from points of the closure to the boundary."""
    pts, single = as_points(z, domain.dim)
    g = np.atleast_1d(domain.gauge(pts))
    if np.any(g > 1.0 + CLOSURE_TOL):
        raise DomainError("boundary_distance needs points in the closure of the domain")
    w = pts - np.asarray(domain.center)
    axes = np.asarray(domain.axes)
    if domain.kind == "ball":
        d = axes[0] - np.sqrt((np.abs(w) ** 2).sum(axis=1))
    elif domain.kind == "polydisc":
        d = (axes - np.abs(w)).min(axis=1)
    else:
        d = _ellipsoid_distance(axes, np.abs(w))
    return _unpack(np.maximum(d, 0.0), single)


def _ellipsoid_distance(axes: np.ndarray, y: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Distance from interior points to an ellipsoid surface.

    ``y`` holds the moduli |w_k|; each complex coordinate contributes a 2-D
    block with equal semiaxes, so only the moduli matter.  The nearest
    boundary point is ``x_k = a_k^2 y_k / (a_k^2 + t)`` where t in
    (-a_min^2, 0] solves F(t) = sum a_k^2 y_k^2 / (a_k^2+t)^2 - 1 = 0.
    F is convex and decreasing there, so Newton from t = 0 approaches the root
    monotonically; steps that leave the bracket fall back to bisection.
    """
    a2 = axes ** 2
    amin2 = a2.min()
    m = y.shape[0]
    t = np.zeros(m)
    lo = np.full(m, -amin2)
    hi = np.zeros(m)
    y2 = y ** 2
    for _ in range(200):
        denom = a2 + t[:, None]
        F = (a2 * y2 / denom ** 2).sum(axis=1) - 1.0
        dF = -2.0 * (a2 * y2 / denom ** 3).sum(axis=1)
        hi = np.where(F <= 0, t, hi)
        lo = np.where(F > 0, t, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dF != 0, F / dF, 0.0)
        t_new = t - step
        bad = ~((t_new > lo) & (t_new <= hi)) | ~np.isfinite(t_new)
        t_new = np.where(bad, 0.5 * (lo + hi), t_new)
        if np.all(np.abs(t_new - t) <= tol * amin2 * 1e-3):
            t = t_new
            break
        t = t_new
    denom = a2 + t[:, None]
    dist = np.abs(t) * np.sqrt((y2 / denom ** 2).sum(axis=1))

    # Degenerate case: the point has no component along the shortest axes and
    # F stays negative all the way to -a_min^2.  The nearest point then sits
    # at t = -a_min^2 with the short-axis coordinate filling the constraint.
    short = np.isclose(a2, amin2)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_long = np.where(short, 0.0, a2 * y / (a2 - amin2 + short))
    rest = 1.0 - (x_long ** 2 / a2).sum(axis=1)
    degenerate = (np.abs(y[:, short]).max(axis=1) < 1e-15) & (rest >= 0)
    if np.any(degenerate):
        d2 = ((y - x_long) ** 2)[:, ~short].sum(axis=1) + amin2 * rest
        dist = np.where(degenerate, np.sqrt(np.maximum(d2, 0.0)), dist)
    return dist


def _gaussian_ball(rng: np.random.Generator, m: int, n: int, interior: bool) -> np.ndarray:
    g = rng.standard_normal((m, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    if interior:
        g *= rng.random(m)[:, None] ** (1.0 / (2 * n))
    return g[:, 0::2] + 1j * g[:, 1::2]


def sample_interior(domain: Domain, m: int, seed) -> np.ndarray:
    """``m`` points uniformly distributed in the domain, deterministic in ``seed``."""
    if m < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    n = domain.dim
    axes = np.asarray(domain.axes)
    if domain.kind == "polydisc":
        r = np.sqrt(rng.random((m, n)))
        theta = 2 * np.pi * rng.random((m, n))
        z = axes * r * np.exp(1j * theta)
    else:
        z = axes * _gaussian_ball(rng, m, n, interior=True)
    return z + np.asarray(domain.center)


def sample_boundary(domain: Domain, m: int, seed) -> np.ndarray:
    """``m`` points on the boundary; directions are Gaussian, faces uniform."""
    if m < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    n = domain.dim
    axes = np.asarray(domain.axes)
    if domain.kind == "polydisc":
        r = np.sqrt(rng.random((m, n)))
        face = rng.integers(0, n, size=m)
        r[np.arange(m), face] = 1.0
        theta = 2 * np.pi * rng.random((m, n))
        z = axes * r * np.exp(1j * theta)
    else:
        z = axes * _gaussian_ball(rng, m, n, interior=False)
    return z + np.asarray(domain.center)


def sample_exhaustion(domain: Domain, eps: float, m: int, seed) -> np.ndarray:
    """``m`` uniform points of the compact set K_eps = {dist(z, boundary) >= eps}."""
    _check_eps(domain, eps)
    rng = np.random.default_rng(seed)
    kept = []
    total = 0
    while total < m:
        batch = sample_interior(domain, max(2 * (m - total), 256), rng)
        batch = batch[boundary_distance(domain, batch) >= eps]
        kept.append(batch)
        total += len(batch)
    return np.concatenate(kept)[:m]


def _check_eps(domain: Domain, eps: float):
    if not 0 < eps < domain.inradius:
        raise DomainError(f"eps must lie in (0, {domain.inradius}), got {eps}")


def _require_inside(domain: Domain, z):
    if not np.all(np.atleast_1d(contains(domain, z))):
        raise DomainError("point is not in the open domain")


def boundary_layer_predicate(layer: BoundaryLayer, z):
    """Membership in the boundary layer (strict inequality)."""
    _require_inside(layer.parent, z)
    return boundary_distance(layer.parent, z) < layer.delta


def compact_exhaustion_predicate(domain: Domain, eps: float, z):
    """Membership in K_eps, the complement of the eps-layer."""
    _check_eps(domain, eps)
    _require_inside(domain, z)
    return boundary_distance(domain, z) >= eps


# -- fibers over the first coordinate (used by the stratified integrator) ----

def first_coordinate_disc(domain: Domain) -> tuple[complex, float]:
    """Center and radius of the projection of the domain to the z1-plane."""
    return domain.center[0], domain.axes[0]


def fiber_volume(domain: Domain, z1: np.ndarray) -> np.ndarray:
    """Volume in C^(n-1) of {z' : (z1, z') in the domain}; zero off the projection."""
    c1, a1 = first_coordinate_disc(domain)
    rest = np.asarray(domain.axes[1:])
    k = domain.dim - 1
    if domain.kind == "polydisc":
        inside = np.abs(z1 - c1) < a1
        return np.where(inside, np.prod(np.pi * rest ** 2), 0.0)
    s = np.clip(1.0 - np.abs((z1 - c1) / a1) ** 2, 0.0, None)
    return np.pi ** k / math.factorial(k) * np.prod(rest ** 2) * s ** k


def sample_fiber(domain: Domain, z1: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One uniform point of the fiber over each entry of ``z1``."""
    c1, a1 = first_coordinate_disc(domain)
    rest = np.asarray(domain.axes[1:])
    k = domain.dim - 1
    m = len(z1)
    if domain.kind == "polydisc":
        r = np.sqrt(rng.random((m, k)))
        w = rest * r * np.exp(2j * np.pi * rng.random((m, k)))
    else:
        s = np.clip(1.0 - np.abs((z1 - c1) / a1) ** 2, 0.0, None)
        w = rest * np.sqrt(s)[:, None] * _gaussian_ball(rng, m, k, interior=True)
    return w + np.asarray(domain.center[1:])
