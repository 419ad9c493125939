"""Monte Carlo integration over domains in C^n = R^(2n).

Two engines share one result type:

* ``mc``: plain Monte Carlo from uniform interior samples, drawn in chunks
  whose random streams are spawned from the QuadratureSpec seed.
* ``stratified``: dyadic annuli in the first coordinate around a focus
  point ``c``, ``rho in (R 2^-(k+1), R 2^-k]`` for k = 0..strata-1.  Each
  annulus samples z1 uniformly and the remaining coordinates uniformly in the
  fiber over z1, weighting by the fiber volume.  The disc left inside the
  last annulus is accounted for by extending the geometric decay of the
  innermost shells.  The fitted decay ratio doubles as a divergence test: a
  ratio >= 1 means the shell contributions do not shrink toward the focus.

Integrands are vectorized: they take an ``(m, n)`` complex array and return
``(m,)`` or ``(m, k)`` values.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .geometry import Domain, fiber_volume, first_coordinate_disc, sample_fiber, sample_interior

METHODS = ("mc", "stratified")
MIN_SAMPLES = 1000
CHUNK = 1 << 17
# fraction of non-finite draws above which the integral is flagged
NONFINITE_LIMIT = 1e-4
# number of innermost shells used to fit the decay ratio
TAIL_WINDOW = 8


class DivergenceError(ArithmeticError):
    """A finite value was required but the integral was flagged divergent."""


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "mc"
    samples: int = 200_000
    seed: int = 0
    strata: int = 40
    focus: complex | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if self.samples < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {self.samples}")
        if self.method == "stratified" and self.strata < 3:
            raise ValueError("stratified integration needs at least 3 strata")

    def reseeded(self, offset: int = 1) -> "QuadratureSpec":
        """Same spec with an independent seed derived from this one."""
        child = np.random.SeedSequence([self.seed, offset]).generate_state(1)[0]
        return replace(self, seed=int(child))

    def with_focus(self, focus) -> "QuadratureSpec":
        return replace(self, focus=complex(focus))

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.focus is None:
            del out["focus"]
        else:
            out["focus"] = [self.focus.real, self.focus.imag]
        return out

    @classmethod
    def from_dict(cls, spec: dict) -> "QuadratureSpec":
        kw = {k: spec[k] for k in ("method", "samples", "seed", "strata") if k in spec}
        for k in ("samples", "seed", "strata"):
            if k in kw:
                if isinstance(kw[k], bool) or int(kw[k]) != kw[k]:
                    raise ValueError(f"quadrature {k} must be an integer")
                kw[k] = int(kw[k])
        if spec.get("focus") is not None:
            f = spec["focus"]
            kw["focus"] = complex(*f) if isinstance(f, (list, tuple)) else complex(f)
        return cls(**kw)


@dataclass
class IntegralResult:
    value: complex | float | np.ndarray
    std_error: float | np.ndarray
    samples_used: int
    divergent: bool = False
    diagnostics: dict = field(default_factory=dict)
    cov: np.ndarray | None = None

    @property
    def finite(self) -> bool:
        return not self.divergent

    def require_finite(self, what: str = "integral"):
        if self.divergent:
            raise DivergenceError(f"{what} flagged divergent ({self.diagnostics})")
        return self


def volume(domain: Domain) -> float:
    """Exact Lebesgue volume."""
    a2 = np.prod(np.asarray(domain.axes) ** 2)
    if domain.kind == "polydisc":
        return float(np.pi ** domain.dim * a2)
    return float(np.pi ** domain.dim / math.factorial(domain.dim) * a2)


def radial_power_integral(R: float, beta: float) -> float:
    """Integral of r^(-2 beta) over the disc of radius R, in polar form."""
    if beta >= 1:
        raise ValueError(f"r^(1-2 beta) is not integrable on [0, R] for beta={beta} >= 1")
    if R <= 0:
        raise ValueError("R must be positive")
    return 2 * np.pi * R ** (2 - 2 * beta) / (2 - 2 * beta)


def hill_tail_index(x: np.ndarray, k: int) -> float:
    """Hill estimate of the upper tail index from the k+1 largest values of ``x``.

    P(X > t) ~ t^-kappa; the mean of X is finite iff kappa > 1.
    """
    x = x[x > 0]
    if len(x) <= k:
        return math.inf
    top = np.sort(np.partition(x, len(x) - k - 1)[len(x) - k - 1:])[::-1]
    logs = np.log(top[:k] / top[k])
    s = logs.sum()
    return math.inf if s == 0 else k / s


def integrate(domain: Domain, integrand, spec: QuadratureSpec) -> IntegralResult:
    """Estimate the integral of ``integrand`` over ``domain`` against dV."""
    if spec.method == "mc":
        return _integrate_mc(domain, integrand, spec)
    return _integrate_stratified(domain, integrand, spec)


def _values(integrand, pts: np.ndarray) -> np.ndarray:
    v = np.asarray(integrand(pts))
    if v.shape[0] != len(pts):
        raise ValueError("integrand must return one value (or row) per point")
    return v.reshape(len(pts), -1)


def _integrate_mc(domain: Domain, integrand, spec: QuadratureSpec) -> IntegralResult:
    N = spec.samples
    n_chunks = -(-N // CHUNK)
    streams = np.random.SeedSequence(spec.seed).spawn(n_chunks)
    k_tail = max(10, int(math.isqrt(N)))
    total = None
    outer = None
    count = 0
    bad = 0
    top = np.empty(0)
    for i, stream in enumerate(streams):
        size = min(CHUNK, N - i * CHUNK)
        v = _values(integrand, sample_interior(domain, size, stream))
        ok = np.all(np.isfinite(v), axis=1)
        bad += int((~ok).sum())
        v = v[ok]
        if total is None:
            total = np.zeros(v.shape[1], dtype=v.dtype)
            outer = np.zeros((v.shape[1], v.shape[1]), dtype=complex)
        total += v.sum(axis=0)
        outer += v.T @ v.conj()
        count += len(v)
        mag = np.abs(v).max(axis=1)
        top = np.concatenate([top, mag])
        if len(top) > k_tail + 1:
            top = np.partition(top, len(top) - k_tail - 1)[len(top) - k_tail - 1:]

    vol = volume(domain)
    kappa = hill_tail_index(top, k_tail)
    diagnostics = {"tail_index": kappa, "nonfinite": bad}
    divergent = bool(bad > NONFINITE_LIMIT * N or kappa < 1.0 or count < 2)
    mean = total / max(count, 1)
    cov = (outer / max(count, 1) - np.outer(mean, mean.conj())) / max(count - 1, 1)
    se = np.sqrt(np.maximum(np.diag(cov).real, 0.0))
    if np.isrealobj(mean):
        cov = cov.real
    return _finish(vol * mean, vol * se, vol ** 2 * cov, count, divergent, diagnostics)


def _finish(value, se, cov, used, divergent, diagnostics) -> IntegralResult:
    if divergent:
        value = np.full_like(value, np.nan)
    if value.shape == (1,):
        return IntegralResult(value[0].item(), float(se[0]), used, divergent, diagnostics,
                              cov.reshape(1, 1))
    return IntegralResult(value, se, used, divergent, diagnostics, cov)


def _integrate_stratified(domain: Domain, integrand, spec: QuadratureSpec) -> IntegralResult:
    c1, a1 = first_coordinate_disc(domain)
    focus = c1 if spec.focus is None else spec.focus
    K = spec.strata
    R = abs(focus - c1) + a1
    per = spec.samples // K
    streams = np.random.SeedSequence(spec.seed).spawn(K)

    shell_mean = []
    shell_cov = []
    for k, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        m = per + (spec.samples - per * K if k == K - 1 else 0)
        r_out = R * 2.0 ** -k
        r_in = r_out / 2
        area = np.pi * (r_out ** 2 - r_in ** 2)
        rho = np.sqrt(r_in ** 2 + (r_out ** 2 - r_in ** 2) * rng.random(m))
        z1 = focus + rho * np.exp(2j * np.pi * rng.random(m))
        fib = fiber_volume(domain, z1)
        rest = sample_fiber(domain, z1, rng)
        inside = fib > 0
        vals = None
        if inside.any():
            pts = np.column_stack([z1[inside], rest[inside]])
            v_in = _values(integrand, pts)
            vals = np.zeros((m, v_in.shape[1]), dtype=v_in.dtype)
            vals[inside] = v_in * (area * fib[inside])[:, None]
        if vals is None:
            probe = _values(integrand, np.atleast_2d(np.asarray(domain.center)))
            vals = np.zeros((m, probe.shape[1]), dtype=probe.dtype)
        if not np.all(np.isfinite(vals)):
            return IntegralResult(np.nan, np.nan, spec.samples, True,
                                  {"nonfinite_shell": k})
        mean = vals.mean(axis=0)
        centered = vals - mean
        shell_mean.append(mean)
        shell_cov.append((centered.T @ centered.conj()) / (m * (m - 1)))

    S = np.array(shell_mean)
    C = np.array(shell_cov)
    se_shell = np.sqrt(np.maximum(np.einsum("kii->ki", C).real, 0.0))
    body = S.sum(axis=0)
    body_cov = C.sum(axis=0)

    tail, tail_var, ratio, ratio_se = _geometric_tail(S, se_shell)
    divergent = bool(np.any(ratio + 2 * ratio_se >= 1.0))
    value = body + tail
    cov = body_cov + np.diag(tail_var)
    if np.isrealobj(value):
        cov = cov.real
    se = np.sqrt(np.maximum(np.diag(cov).real, 0.0))
    diagnostics = {"tail_ratio": _scalar(ratio), "tail_ratio_se": _scalar(ratio_se),
                   "tail_fraction": _scalar(np.abs(tail) / np.maximum(np.abs(value), 1e-300))}
    return _finish(value, se, cov, spec.samples, divergent, diagnostics)


def _scalar(x):
    x = np.asarray(x, dtype=float)
    return float(x[0]) if x.size == 1 else x.tolist()


def _geometric_tail(S: np.ndarray, se: np.ndarray):
    """Extend the innermost shells geometrically, one column at a time.

    The decay ratio is fitted by least squares on log-magnitudes over the last
    TAIL_WINDOW shells.  Magnitudes are padded by two standard errors so
    shells that are pure noise do not fake a slow decay.
    """
    K, p = S.shape
    w = min(TAIL_WINDOW, K)
    idx = np.arange(K - w, K, dtype=float)
    tail = np.zeros(p, dtype=S.dtype)
    tail_var = np.zeros(p)
    ratio = np.zeros(p)
    ratio_se = np.zeros(p)
    for j in range(p):
        mag = np.abs(S[K - w:, j]) + 2 * se[K - w:, j]
        if np.any(mag <= 0):
            continue
        y = np.log(mag)
        slope, intercept = np.polyfit(idx, y, 1)
        resid = y - (slope * idx + intercept)
        sxx = ((idx - idx.mean()) ** 2).sum()
        slope_se = math.sqrt((resid ** 2).sum() / max(w - 2, 1) / sxx)
        r = math.exp(slope)
        ratio[j] = r
        ratio_se[j] = r * slope_se
        if r + 2 * ratio_se[j] < 1.0:
            last = S[-1, j]
            tail[j] = last * r / (1 - r)
            tail_var[j] = (se[-1, j] * r / (1 - r)) ** 2 + (abs(last) * ratio_se[j] / (1 - r) ** 2) ** 2
    return tail, tail_var, ratio, ratio_se
