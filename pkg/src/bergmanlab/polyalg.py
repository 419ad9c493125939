"""Sparse multivariate polynomials with complex coefficients.

A polynomial is a map from exponent tuples to coefficients.  Zero
coefficients are never stored, so the zero polynomial has an empty term map
and degree -1.  Terms are kept in graded-lexicographic order: by total
degree, then with higher powers of earlier variables first.

Coefficients are double-precision complex.  Arithmetic on integer (or
dyadic) coefficients is exact as long as intermediate values stay below 2^53.
"""
from __future__ import annotations

import itertools
import numbers
from types import MappingProxyType

import numpy as np

MultiIndex = tuple[int, ...]


def grlex_key(alpha: MultiIndex):
    return (sum(alpha), tuple(-a for a in alpha))


def multi_indices(n: int, d: int) -> list[MultiIndex]:
    """All exponent tuples of length n with total degree <= d, graded-lex sorted."""
    if d < 0:
        return []
    out = []
    for total in range(d + 1):
        out.extend(_with_total(n, total))
    return out


def _with_total(n: int, total: int) -> list[MultiIndex]:
    if n == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total, -1, -1) for rest in _with_total(n - 1, total - first)]


class MultiPoly:
    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms=None):
        if n < 1:
            raise ValueError("polynomials need at least one variable")
        acc: dict[MultiIndex, complex] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or any(a < 0 for a in alpha):
                raise ValueError(f"bad exponent {alpha} for {n} variables")
            acc[alpha] = acc.get(alpha, 0j) + complex(c)
        self.n = n
        self._terms = {a: acc[a] for a in sorted(acc, key=grlex_key) if acc[a] != 0}
        self._hash = None

    @classmethod
    def _raw(cls, n: int, acc: dict) -> "MultiPoly":
        p = cls.__new__(cls)
        p.n = n
        p._terms = {a: acc[a] for a in sorted(acc, key=grlex_key) if acc[a] != 0}
        p._hash = None
        return p

    @classmethod
    def zero(cls, n: int) -> "MultiPoly":
        return cls(n)

    @classmethod
    def constant(cls, n: int, c) -> "MultiPoly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n: int, k: int) -> "MultiPoly":
        """The coordinate function z_k (0-based)."""
        if not 0 <= k < n:
            raise ValueError(f"axis {k} out of range for {n} variables")
        return cls(n, {tuple(int(i == k) for i in range(n)): 1})

    @classmethod
    def monomial(cls, alpha: MultiIndex, c=1) -> "MultiPoly":
        return cls(len(alpha), {tuple(alpha): c})

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, alpha: MultiIndex) -> complex:
        return self._terms.get(tuple(alpha), 0j)

    # -- ring operations --------------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, numbers.Number):
            return MultiPoly.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for a, c in other._terms.items():
            acc[a] = acc.get(a, 0j) + c
        return MultiPoly._raw(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.n, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            c = complex(other)
            return MultiPoly._raw(self.n, {a: c * v for a, v in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[MultiIndex, complex] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                acc[key] = acc.get(key, 0j) + ca * cb
        return MultiPoly._raw(self.n, acc)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, numbers.Integral) or e < 0:
            raise ValueError("only nonnegative integer powers")
        out = MultiPoly.constant(self.n, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, numbers.Number):
            other = MultiPoly.constant(self.n, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, tuple(self._terms.items())))
        return self._hash

    def __repr__(self):
        if not self._terms:
            return f"MultiPoly({self.n}, 0)"
        parts = []
        for a, c in self._terms.items():
            mono = "*".join(f"z{k + 1}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(a) if e)
            parts.append(f"({c:g})" + (f"*{mono}" if mono else ""))
        return f"MultiPoly({self.n}, {' + '.join(parts)})"

    # -- calculus and evaluation -------------------------------------------

    def derivative(self, k: int) -> "MultiPoly":
        """Formal complex partial derivative in z_k (0-based)."""
        if not 0 <= k < self.n:
            raise ValueError(f"axis {k} out of range for {self.n} variables")
        acc = {}
        for a, c in self._terms.items():
            if a[k]:
                b = a[:k] + (a[k] - 1,) + a[k + 1:]
                acc[b] = c * a[k]
        return MultiPoly._raw(self.n, acc)

    def evaluate(self, z):
        """Value at a point ``(n,)`` or at each row of an ``(m, n)`` array."""
        arr = np.asarray(z, dtype=complex)
        single = arr.ndim == 1
        pts = np.atleast_2d(arr)
        if pts.shape[-1] != self.n:
            raise ValueError(f"expected points of dimension {self.n}, got {arr.shape}")
        out = np.zeros(len(pts), dtype=complex)
        if self._terms:
            top = np.max(np.array(list(self._terms)), axis=0)
            powers = [_power_table(pts[:, k], int(top[k])) for k in range(self.n)]
            for a, c in self._terms.items():
                term = np.full(len(pts), c)
                for k, e in enumerate(a):
                    if e:
                        term = term * powers[k][:, e]
                out += term
        return out[0] if single else out

    __call__ = evaluate

    def compose(self, maps) -> "MultiPoly":
        """Exact substitution z_k -> maps[k]."""
        return Composer(maps).compose(self)

    # -- text form ---------------------------------------------------------

    def to_text(self) -> str:
        """One ``re,im:e1,...,en`` line per term, graded-lex order."""
        lines = [f"{c.real!r},{c.imag!r}:" + ",".join(map(str, a)) for a, c in self._terms.items()]
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "MultiPoly":
        terms = {}
        for lineno, line in enumerate(text.strip().splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                coeff, exps = line.split(":")
                re, im = coeff.split(",")
                alpha = tuple(int(e) for e in exps.split(","))
                c = complex(float(re), float(im))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse term {line!r}") from exc
            if n is None:
                n = len(alpha)
            if len(alpha) != n:
                raise ValueError(f"line {lineno}: expected {n} exponents, got {len(alpha)}")
            terms[alpha] = terms.get(alpha, 0j) + c
        if n is None:
            raise ValueError("empty polynomial text needs an explicit dimension")
        return cls(n, terms)


def _power_table(x: np.ndarray, top: int) -> np.ndarray:
    table = np.ones((len(x), top + 1), dtype=complex)
    for e in range(1, top + 1):
        table[:, e] = table[:, e - 1] * x
    return table


class Composer:
    """Substitutes a fixed tuple of polynomials into many polynomials.

    Powers of each component are memoized by (component index, exponent), so
    composing a whole monomial basis reuses the expansions.
    """

    def __init__(self, maps):
        maps = tuple(maps)
        if not maps:
            raise ValueError("need at least one component")
        m = maps[0].n
        if any(p.n != m for p in maps):
            raise ValueError("all components must share one ambient dimension")
        self.maps = maps
        self.ambient = m
        self._powers: dict[tuple[int, int], MultiPoly] = {}

    def power(self, k: int, e: int) -> MultiPoly:
        key = (k, e)
        if key not in self._powers:
            if e == 0:
                self._powers[key] = MultiPoly.constant(self.ambient, 1)
            else:
                self._powers[key] = self.power(k, e - 1) * self.maps[k]
        return self._powers[key]

    def compose(self, p: MultiPoly) -> MultiPoly:
        if p.n != len(self.maps):
            raise ValueError(f"polynomial in {p.n} variables, {len(self.maps)} components given")
        acc: dict[MultiIndex, complex] = {}
        for a, c in p.terms.items():
            term = MultiPoly.constant(self.ambient, c)
            for k, e in enumerate(a):
                if e:
                    term = term * self.power(k, e)
            for b, v in term.terms.items():
                acc[b] = acc.get(b, 0j) + v
        return MultiPoly._raw(self.ambient, acc)


def determinant(matrix) -> MultiPoly:
    """Leibniz expansion of the determinant of a square matrix of polynomials."""
    size = len(matrix)
    n = matrix[0][0].n
    out = MultiPoly.zero(n)
    for perm in itertools.permutations(range(size)):
        sign = _parity(perm)
        term = MultiPoly.constant(n, sign)
        for i, j in enumerate(perm):
            term = term * matrix[i][j]
            if term.is_zero():
                break
        out = out + term
    return out


def _parity(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign
