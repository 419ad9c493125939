import math

import numpy as np
import pytest

from bergmanlab.geometry import ellipsoid, polydisc, unit_ball
from bergmanlab.quadrature import (DivergenceError, QuadratureSpec, hill_tail_index, integrate,
                                   radial_power_integral, volume)

from _oracles import f_norm_sq_gamma, f_norm_sq_polydisc


def pole_integrand(beta):
    return lambda z: np.abs(1 - z[:, 0]) ** (-2 * beta)


def test_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        QuadratureSpec(samples=10)
    with pytest.raises(ValueError):
        QuadratureSpec(method="grid")
    q = QuadratureSpec("stratified", 5000, 3, 20, focus=1 + 0j)
    assert QuadratureSpec.from_dict(q.to_dict()) == q
    assert q.reseeded().seed != q.seed
    assert q.reseeded() == q.reseeded()


def test_volumes():
    assert volume(unit_ball(2)) == pytest.approx(math.pi ** 2 / 2)
    assert volume(polydisc(1, 2)) == pytest.approx(4 * math.pi ** 2)
    assert volume(ellipsoid(1, 0.5)) == pytest.approx(math.pi ** 2 / 8)


def test_radial_power_integral():
    from scipy.integrate import quad
    assert radial_power_integral(1.0, 0.0) == pytest.approx(math.pi)
    assert radial_power_integral(1.0, 0.5) == pytest.approx(2 * math.pi)
    assert radial_power_integral(2.0, 0.5) == pytest.approx(4 * math.pi)
    for R, beta in [(2.0, 0.5), (0.7, 0.9), (1.5, -0.5)]:
        want, _ = quad(lambda r: 2 * math.pi * r ** (1 - 2 * beta), 0, R)
        assert radial_power_integral(R, beta) == pytest.approx(want, rel=1e-7)
    with pytest.raises(ValueError):
        radial_power_integral(1.0, 1.0)


def test_hill_estimator_recovers_pareto_index():
    rng = np.random.default_rng(0)
    x = rng.pareto(1.5, 400_000) + 1
    assert hill_tail_index(x, 600) == pytest.approx(1.5, rel=0.1)


@pytest.mark.parametrize("method", ["mc", "stratified"])
def test_constant_gives_volume(method):
    r = integrate(polydisc(1, 1), lambda z: np.ones(len(z)), QuadratureSpec(method, 20_000, 0))
    assert r.value == pytest.approx(math.pi ** 2, rel=1e-2)
    assert not r.divergent


@pytest.mark.parametrize("method", ["mc", "stratified"])
def test_moments_within_three_sigma(method):
    for dom, want in [(unit_ball(2), math.pi ** 2 / 6), (polydisc(1, 1), math.pi ** 2 / 2)]:
        r = integrate(dom, lambda z: np.abs(z[:, 0]) ** 2, QuadratureSpec(method, 200_000, 4))
        assert abs(r.value - want) < 3 * r.std_error


def test_vector_integrand_covariance():
    r = integrate(unit_ball(2), lambda z: np.column_stack([np.ones(len(z)), np.abs(z[:, 0]) ** 2]),
                  QuadratureSpec("mc", 50_000, 0))
    assert r.value.shape == (2,) and r.cov.shape == (2, 2)
    assert np.allclose(np.sqrt(np.diag(r.cov)), r.std_error)


def test_determinism_byte_identical():
    q = QuadratureSpec("mc", 300_000, 11)
    f = pole_integrand(0.4)
    a, b = integrate(polydisc(1, 1), f, q), integrate(polydisc(1, 1), f, q)
    assert np.float64(a.value).tobytes() == np.float64(b.value).tobytes()
    assert np.float64(a.std_error).tobytes() == np.float64(b.std_error).tobytes()


@pytest.mark.parametrize("beta", [0.3, 0.9, 0.99])
def test_stratified_pole_norm_matches_reduced_integral(beta):
    q = QuadratureSpec("stratified", 400_000, 2, 40, focus=1 + 0j)
    r = integrate(polydisc(1, 1), pole_integrand(beta), q)
    want = f_norm_sq_polydisc(beta)
    assert not r.divergent
    assert abs(r.value - want) < 3 * r.std_error
    assert want == pytest.approx(f_norm_sq_gamma("polydisc", beta), rel=1e-7)


@pytest.mark.parametrize("beta", [1.0, 1.2])
def test_stratified_flags_divergence(beta):
    r = integrate(polydisc(1, 1), pole_integrand(beta), QuadratureSpec("stratified", 200_000, 0, 40, focus=1))
    assert r.divergent and math.isnan(r.value)
    with pytest.raises(DivergenceError):
        r.require_finite()


def test_mc_flags_heavy_tails_only():
    q = QuadratureSpec("mc", 1_000_000, 0)
    assert not integrate(unit_ball(2), pole_integrand(1.2), q).divergent
    assert integrate(unit_ball(2), pole_integrand(1.8), q).divergent
    assert integrate(polydisc(1, 1), pole_integrand(1.3), q).divergent


def test_nonfinite_draws_flag_divergence():
    r = integrate(unit_ball(2), lambda z: np.where(np.abs(z[:, 0]) < 0.1, np.inf, 1.0),
                  QuadratureSpec("mc", 10_000, 0))
    assert r.divergent
