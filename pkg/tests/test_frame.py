import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowleaf.frame import (
    HyperbolicMatrix,
    LeafCoord,
    NotHyperbolic,
    coord_s,
    coord_u,
    dist,
    dist_s,
    dist_u,
    eigenframe,
    leaf_neighborhood_contains,
)

MATRICES = [(2, 1, 1, 1), (1, 1, 1, 2), (3, 1, 2, 1), (5, 2, 2, 1), (2, -1, -1, 1)]
coords = st.floats(-10, 10, allow_nan=False)
points = st.tuples(coords, coords).map(np.array)


@pytest.mark.parametrize("entries", [(1, 1, 0, 1), (2, 1, 1, 2), (0, 1, -1, 0), (1, 0, 0, 1), (-2, 1, -1, 0)])
def test_rejects_non_hyperbolic(entries):
    with pytest.raises(NotHyperbolic):
        HyperbolicMatrix(*entries)


def test_rejects_non_integer():
    with pytest.raises(NotHyperbolic):
        HyperbolicMatrix(2.5, 1, 1, 1)


def test_cat_map_eigenvalues(cat):
    fr = eigenframe(cat)
    assert fr.mu == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-15)
    assert fr.lam == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-15)
    assert fr.lam * fr.mu == 1.0


@pytest.mark.parametrize("entries", MATRICES)
def test_eigen_relations(entries):
    m = HyperbolicMatrix(*entries)
    fr = eigenframe(m)
    A = m.array
    assert abs(fr.lam * fr.mu - 1.0) <= 2 * np.finfo(float).eps
    np.testing.assert_allclose(A @ fr.v_u, fr.mu * fr.v_u, atol=1e-13)
    np.testing.assert_allclose(A @ fr.v_s, fr.lam * fr.v_s, atol=1e-13)
    np.testing.assert_allclose(fr.nu_u @ A, fr.mu * fr.nu_u, atol=1e-13)
    np.testing.assert_allclose(fr.nu_s @ A, fr.lam * fr.nu_s, atol=1e-13)
    # stable coordinate vanishes along unstable direction and vice versa
    assert abs(fr.nu_u @ fr.v_s) < 1e-14
    assert abs(fr.nu_s @ fr.v_u) < 1e-14
    for v in (fr.v_u, fr.v_s, fr.nu_u, fr.nu_s):
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)
        assert v[np.flatnonzero(v)[0]] > 0


@settings(max_examples=200, deadline=None)
@given(points, points)
def test_contraction_identities(x, y):
    fr = eigenframe(HyperbolicMatrix(2, 1, 1, 1))
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    A_inv = np.array([[1.0, -1.0], [-1.0, 2.0]])
    scale = 1e-12 * (1 + np.abs(x).max() + np.abs(y).max())
    assert abs(dist_s(fr, A @ x, A @ y) - fr.lam * dist_s(fr, x, y)) <= 4 * scale
    assert abs(dist_u(fr, A_inv @ x, A_inv @ y) - fr.lam * dist_u(fr, x, y)) <= 4 * scale


@settings(max_examples=200, deadline=None)
@given(points, points, points)
def test_pseudo_distance_is_a_metric(x, y, z):
    fr = eigenframe(HyperbolicMatrix(2, 1, 1, 1))
    assert dist(fr, x, y) == dist(fr, y, x)
    assert dist(fr, x, z) <= dist(fr, x, y) + dist(fr, y, z) + 1e-12
    assert dist(fr, x, x) == 0


@settings(max_examples=200, deadline=None)
@given(points.filter(lambda v: np.abs(v).max() > 1e-100), st.sampled_from(MATRICES))
def test_norm_equivalence(x, entries):
    fr = eigenframe(HyperbolicMatrix(*entries))
    d = dist(fr, x, np.zeros(2))
    r = np.linalg.norm(x)
    assert fr.lower_norm_constant * r <= d * (1 + 1e-12)
    assert d <= fr.upper_norm_constant * r * (1 + 1e-12)


def test_coords_linear(cat):
    fr = eigenframe(cat)
    x = np.array([[0.3, 0.7], [1.0, 0.0]])
    np.testing.assert_allclose(coord_u(fr, x), x @ fr.nu_u)
    np.testing.assert_allclose(coord_s(fr, x), x @ fr.nu_s)


def test_leaf_image_and_translate(cat):
    fr = eigenframe(cat)
    leaf = LeafCoord("stable", 0.2)
    assert leaf.image(fr).value == pytest.approx(0.2 * fr.mu)
    assert leaf.image(fr, -2).value == pytest.approx(0.2 * fr.lam**2)
    assert LeafCoord("unstable", 0.2).image(fr).value == pytest.approx(0.2 * fr.lam)
    assert leaf.translate(fr, (1, -1)).value == pytest.approx(0.2 + fr.nu_u @ [1, -1])


def test_leaf_neighborhood(cat):
    fr = eigenframe(cat)
    leaf = LeafCoord("stable", 0.0)
    x = np.array([fr.v_s * 5, fr.v_u * 0.05, fr.v_u * 0.2])
    assert list(leaf_neighborhood_contains(fr, leaf, 0.1, x)) == [True, True, False]
    with pytest.raises(ValueError):
        leaf_neighborhood_contains(fr, leaf, -1.0, x)
