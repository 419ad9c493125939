import math

import numpy as np
import pytest

from bergmanlab.geometry import ellipsoid, polydisc, unit_ball
from bergmanlab.maps import HolomorphicMap, NotSelfMapError, identity, projection, random_map, scale
from bergmanlab.operatorlab import (COMPACT, INCONCLUSIVE, NONCOMPACT, build_matrix, catalog, classify,
                                    compactness_diagnostic, quadrature_entry, reverse_carleson_ratio,
                                    singular_values)
from bergmanlab.polyalg import MultiPoly
from bergmanlab.quadrature import QuadratureSpec


def test_identity_compression_is_identity():
    M = build_matrix(identity(), unit_ball(2), 4)
    assert np.allclose(M.entries, np.eye(15))


def test_scale_singular_values():
    s = singular_values(build_matrix(scale(0.5), polydisc(1, 1), 6))
    want = sorted([0.5 ** k for k in range(7) for _ in range(k + 1)], reverse=True)
    assert np.allclose(s, want, atol=1e-12)


def test_exact_entries_agree_with_quadrature():
    z1, z2 = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
    phi = HolomorphicMap((0.5 * z1 * z2 + 0.3 * z1, 0.4 * z2 * z2 + 0.2))
    dom = unit_ball(2)
    M = build_matrix(phi, dom, 2)
    q = QuadratureSpec("mc", 100_000, 0)
    for i, j in [(0, 0), (1, 1), (4, 1), (2, 0), (5, 2)]:
        # row i is the target basis element, column j the composed one
        value, se = quadrature_entry(phi, dom, M.basis[j].alpha, M.basis[i].alpha, q)
        assert abs(value - M.entries[i, j]) < 4 * se + 1e-12


def test_non_self_map_rejected():
    with pytest.raises(NotSelfMapError):
        build_matrix(scale(1.1), unit_ball(2), 2)


def test_classify_rules():
    flat = [np.array([1.0, 0.5]), np.array([1.0, 0.5, 0.25]), np.array([1.0, 0.5, 0.25, 0.1])]
    assert classify(flat, 0.9) == ([1, 1, 1], COMPACT)
    grow = [np.ones(3), np.ones(5), np.ones(7)]
    assert classify(grow, 0.9) == ([3, 5, 7], NONCOMPACT)
    assert classify([np.ones(3), np.ones(3), np.ones(5)], 0.9)[1] == INCONCLUSIVE


@pytest.mark.parametrize("name", list(catalog(2)))
def test_compression_norms_are_monotone_in_degree(name):
    # P_d T P_d is a compression of P_(d+1) T P_(d+1), so singular values interlace
    phi = catalog(2)[name]
    prev = None
    for d in range(2, 7):
        s = singular_values(build_matrix(phi, unit_ball(2), d))
        if prev is not None:
            k = len(prev)
            assert np.all(s[:k] >= prev - 1e-12)
        prev = s


def test_random_self_map_singular_values_interlace():
    phi = random_map(np.random.default_rng(0), 2, 2)
    # coefficient l1-norm below 1 makes it a self-map of the bidisc
    coeff = 0.9 / max(sum(abs(c) for c in comp.terms.values()) for comp in phi.components)
    small = HolomorphicMap(tuple(c * coeff for c in phi.components))
    prev = None
    for d in range(1, 5):
        s = singular_values(build_matrix(small, polydisc(1, 1), d))
        if prev is not None:
            assert np.all(s[:len(prev)] >= prev - 1e-12)
        prev = s


def test_diagnostic_dict():
    diag = compactness_diagnostic(scale(0.5), unit_ball(2), [2, 4])
    d = diag.to_dict()
    assert d["verdict"] == COMPACT
    assert d["plateau_counts"] == [1, 1]
    # growth needs three degrees
    assert compactness_diagnostic(identity(), unit_ball(2), [2, 4]).verdict == INCONCLUSIVE
    rows = list(diag.profile_rows())
    assert rows[0] == (2, 0, 1.0)


def test_carleson_ratio_closed_form():
    # ||z1^k||^2 over {|z| < r} scales as r^(2k + 4) on the 2-ball
    for k in (0, 3):
        r = reverse_carleson_ratio(lambda z, k=k: z[:, 0] ** k, unit_ball(2), 0.2, QuadratureSpec("mc", 200_000, 1))
        want = 1 / math.sqrt(1 - 0.8 ** (2 * k + 4))
        assert abs(r.value - want) < 3 * r.std_error


def test_ellipsoid_compression():
    s = singular_values(build_matrix(scale(0.5), ellipsoid(1, 0.5), 4))
    assert s[0] == pytest.approx(1.0) and s[-1] == pytest.approx(1 / 16)


def test_projection_essential_bound_is_one():
    from bergmanlab.operatorlab import essential_lower_bound
    from bergmanlab.sequences import TestFamilySpec
    b = essential_lower_bound(projection(), TestFamilySpec("f", 0.5, polydisc(1, 1)), [2, 4],
                              QuadratureSpec("mc", 50_000, 0))
    assert b.value == pytest.approx(1.0, abs=1e-12)
