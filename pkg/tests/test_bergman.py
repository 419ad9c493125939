import math

import numpy as np
import pytest

from bergmanlab.bergman import (enumerate_basis, inner_product, monomial_norm_sq, monomial_values,
                                norm_p)
from bergmanlab.geometry import DomainError, ellipsoid, polydisc, unit_ball
from bergmanlab.polyalg import multi_indices
from bergmanlab.quadrature import QuadratureSpec

from _oracles import ball2_monomial_norm_sq, polydisc_monomial_norm_sq


@pytest.mark.parametrize("alpha", multi_indices(2, 5))
def test_closed_forms_match_reduced_quadrature(alpha):
    assert monomial_norm_sq(alpha, unit_ball(2)) == pytest.approx(ball2_monomial_norm_sq(alpha), rel=1e-9)
    assert monomial_norm_sq(alpha, polydisc(1, 0.5)) == pytest.approx(
        polydisc_monomial_norm_sq(alpha, (1, 0.5)), rel=1e-9)


def test_ellipsoid_norm_by_change_of_variables():
    # |w^alpha|^2 on E(1, 1/2): substitute w = (z1, z2/2), dV(w) = dV(z)/4
    for alpha in multi_indices(2, 4):
        want = ball2_monomial_norm_sq(alpha) * 0.5 ** (2 * alpha[1]) / 4
        assert monomial_norm_sq(alpha, ellipsoid(1, 0.5)) == pytest.approx(want, rel=1e-9)


def test_trivial_values():
    assert monomial_norm_sq((0, 0), unit_ball(2)) == pytest.approx(math.pi ** 2 / 2)
    assert monomial_norm_sq((0, 0), polydisc(1, 1)) == pytest.approx(math.pi ** 2)


def test_translated_domain_rejected():
    with pytest.raises(DomainError):
        monomial_norm_sq((1, 0), unit_ball(2).translated((0.1, 0)))


def test_basis_is_orthonormal_by_quadrature():
    dom = polydisc(1, 1)
    basis = enumerate_basis(2, 2, dom)
    q = QuadratureSpec("mc", 200_000, 1)
    vals = np.column_stack([e(np.zeros((1, 2))) for e in basis])
    assert vals.shape == (1, 6)
    z_fn = [lambda z, e=e: e(z) for e in basis]
    for i, f in enumerate(z_fn):
        for j, g in enumerate(z_fn):
            r = inner_product(f, g, dom, q)
            want = 1.0 if i == j else 0.0
            assert abs(r.value - want) < 5 * r.std_error + 1e-12


def test_norm_p_of_constant():
    r = norm_p(lambda z: np.full(len(z), 2.0), unit_ball(2), 3, QuadratureSpec("mc", 5000, 0))
    assert r.value == pytest.approx(2 * (math.pi ** 2 / 2) ** (1 / 3))
    with pytest.raises(ValueError):
        norm_p(lambda z: z[:, 0], unit_ball(2), 0.5, QuadratureSpec())


def test_monomial_values():
    z = np.array([[2, 3], [1j, 1]])
    assert np.allclose(monomial_values(z, (2, 1)), [12, -1])
