import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergmanlab.geometry import (BoundaryLayer, Domain, DomainError, ball, boundary_distance,
                                 boundary_layer_predicate, compact_exhaustion_predicate, contains,
                                 ellipsoid, fiber_volume, polydisc, sample_boundary, sample_exhaustion,
                                 sample_interior, unit_ball)

from _oracles import ellipsoid2_distance

DOMAINS = [unit_ball(2), ball(3, 2.0), polydisc(1, 1), polydisc(1.0, 0.5, 2.0), ellipsoid(1, 0.5),
           ellipsoid(2.0, 1.0, 0.5)]


def test_invalid_parameters():
    with pytest.raises(DomainError):
        polydisc(1, -1)
    with pytest.raises(DomainError):
        Domain("ball", (1.0, 2.0))
    with pytest.raises(DomainError):
        Domain("torus", (1.0, 1.0))
    with pytest.raises(DomainError):
        Domain("ball", (1.0,))
    with pytest.raises(DomainError):
        BoundaryLayer(unit_ball(2), 1.0)


def test_str_and_dict_roundtrip():
    assert str(unit_ball(2)) == "UnitBall(2)"
    assert str(polydisc(1, 1)) == "Polydisc(1, 1)"
    for d in DOMAINS + [unit_ball(2).translated((1, 0))]:
        assert Domain.from_dict(d.to_dict()) == d


@pytest.mark.parametrize("domain", DOMAINS, ids=str)
def test_samples_lie_inside(domain):
    z = sample_interior(domain, 5000, 3)
    assert z.shape == (5000, domain.dim)
    assert np.all(contains(domain, z))
    b = sample_boundary(domain, 2000, 3)
    assert np.allclose(domain.gauge(b), 1.0, atol=1e-12)


@pytest.mark.parametrize("domain", DOMAINS, ids=str)
def test_sampling_is_deterministic(domain):
    assert np.array_equal(sample_interior(domain, 100, 7), sample_interior(domain, 100, 7))
    assert not np.array_equal(sample_interior(domain, 100, 7), sample_interior(domain, 100, 8))


def test_uniformity_of_interior_samples():
    # fraction inside the half-radius ball is (1/2)^(2n) for the ball, (1/4)^n for the polydisc
    z = sample_interior(unit_ball(2), 200_000, 0)
    frac = np.mean(np.linalg.norm(z, axis=1) < 0.5)
    assert abs(frac - 1 / 16) < 4 * math.sqrt(frac * (1 - frac) / len(z))
    z = sample_interior(polydisc(1, 1), 200_000, 0)
    frac = np.mean(np.abs(z[:, 0]) < 0.5)
    assert abs(frac - 0.25) < 4 * math.sqrt(0.25 * 0.75 / len(z))


def test_distance_closed_forms():
    assert boundary_distance(unit_ball(2), np.array([0, 0.25])) == pytest.approx(0.75)
    assert boundary_distance(polydisc(1, 1), np.array([0, 0.25])) == pytest.approx(0.75)
    assert boundary_distance(polydisc(1, 0.5), np.zeros(2)) == pytest.approx(0.5)
    assert boundary_distance(ellipsoid(1, 0.5), np.zeros(2)) == pytest.approx(0.5)
    assert boundary_distance(unit_ball(2), np.array([1, 0])) == 0.0


def test_ellipsoid_distance_matches_brute_force():
    rng = np.random.default_rng(1)
    dom = ellipsoid(1, 0.5)
    pts = sample_interior(dom, 60, rng)
    got = boundary_distance(dom, pts)
    want = [ellipsoid2_distance((1, 0.5), p) for p in pts]
    assert np.allclose(got, want, atol=1e-9)


def test_ellipsoid_distance_on_long_axis():
    # points on the long axis need the degenerate branch
    dom = ellipsoid(1, 0.5)
    for x in (0.0, 0.3, 0.74, 0.9):
        assert boundary_distance(dom, np.array([x, 0])) == pytest.approx(ellipsoid2_distance((1, 0.5), (x, 0)),
                                                                          abs=1e-9)


def test_distance_outside_raises():
    with pytest.raises(DomainError):
        boundary_distance(unit_ball(2), np.array([1.1, 0]))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(DOMAINS), st.integers(0, 2 ** 32 - 1))
def test_distance_is_one_lipschitz_and_vanishes_on_boundary(domain, seed):
    z = sample_interior(domain, 40, seed)
    w = sample_interior(domain, 40, seed + 1)
    d = boundary_distance(domain, z) - boundary_distance(domain, w)
    assert np.all(np.abs(d) <= np.linalg.norm(z - w, axis=1) + 1e-9)
    assert np.allclose(boundary_distance(domain, sample_boundary(domain, 20, seed)), 0.0, atol=1e-9)


def test_layer_and_exhaustion_partition_the_domain():
    dom = polydisc(1, 1)
    z = sample_interior(dom, 5000, 0)
    layer = boundary_layer_predicate(BoundaryLayer(dom, 0.2), z)
    core = compact_exhaustion_predicate(dom, 0.2, z)
    assert np.all(layer ^ core)
    # the 0.2-layer of the bidisc has volume fraction 1 - 0.8^4
    assert abs(layer.mean() - (1 - 0.8 ** 4)) < 0.03


def test_exhaustion_samples():
    dom = unit_ball(2)
    k = sample_exhaustion(dom, 0.2, 3000, 5)
    assert len(k) == 3000
    assert np.all(boundary_distance(dom, k) >= 0.2)
    with pytest.raises(DomainError):
        sample_exhaustion(dom, 1.5, 10, 0)


def test_predicates_reject_outside_points():
    with pytest.raises(DomainError):
        boundary_layer_predicate(BoundaryLayer(unit_ball(2), 0.2), np.array([2, 0]))


def test_translation_moves_everything():
    dom = unit_ball(2).translated((1, 0))
    z = sample_interior(dom, 1000, 0)
    assert np.all(z[:, 0].real > 0)
    assert boundary_distance(dom, np.array([1, 0])) == pytest.approx(1.0)


@pytest.mark.parametrize("domain", [unit_ball(2), polydisc(1, 0.5), ellipsoid(1, 0.5, 2.0)], ids=str)
def test_fiber_volumes_integrate_to_volume(domain):
    from scipy.integrate import quad
    a1 = domain.axes[0]
    total, _ = quad(lambda r: 2 * math.pi * r * fiber_volume(domain, np.array([r + 0j]))[0], 0, a1)
    if domain.kind == "polydisc":
        want = math.pi ** domain.dim * math.prod(a * a for a in domain.axes)
    else:
        want = math.pi ** domain.dim / math.factorial(domain.dim) * math.prod(a * a for a in domain.axes)
    assert total == pytest.approx(want, rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(DOMAINS), st.integers(0, 2 ** 32 - 1), st.floats(0.01, 0.99))
def test_contains_is_monotone_under_scaling(domain, seed, t):
    rng = np.random.default_rng(seed)
    z = 1.2 * max(domain.axes) * (rng.normal(size=(50, domain.dim)) + 1j * rng.normal(size=(50, domain.dim)))
    inside = contains(domain, z)
    assert np.all(contains(domain, t * z)[inside])
