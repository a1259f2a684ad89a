import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvedlink.errors import AmbiguousTransport, NotOnManifold, Singular, TagMismatch
from curvedlink.space import (Point, SpaceTag, TangentVec, distance, exp_map, geodesic_dir, geometry, grad_distance,
                              left_translate, minkowski_form, parallel_transport, quat_conj, quat_mul, random_isometry,
                              tangent_cross, triple, triple_product)

seeds = st.integers(0, 2**32 - 1)
SPACES = ["r3", "s3", "h3"]


def random_point(tag, rng):
    g = geometry(tag)
    if tag == "s3":
        return g.reproject(rng.normal(size=4))
    if tag == "h3":
        v = rng.normal(size=3) * 0.7
        return np.concatenate([[np.sqrt(1 + v @ v)], v])
    return rng.normal(size=3)


def random_tangent(tag, x, rng):
    return rng.normal(size=3) @ geometry(tag).basis(x)


def test_distance_examples():
    assert distance(Point("s3", [1, 0, 0, 0]), Point("s3", [0, 1, 0, 0])) == pytest.approx(np.pi / 2, abs=1e-15)
    y = Point("h3", [np.cosh(1), np.sinh(1), 0, 0])
    assert distance(Point("h3", [1, 0, 0, 0]), y) == pytest.approx(1.0, abs=1e-14)
    for tag, c in (("s3", [0, 0, 1, 0]), ("h3", [1, 0, 0, 0]), ("r3", [1, 2, 3])):
        assert distance(Point(tag, c), Point(tag, c)) == 0.0


def test_geodesic_dir_examples():
    v = geodesic_dir(Point("s3", [1, 0, 0, 0]), Point("s3", [0, 1, 0, 0]))
    np.testing.assert_allclose(v.comps, [0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(geodesic_dir(Point("r3", [0, 0, 0]), Point("r3", [2, 0, 0])).comps, [1, 0, 0])
    v = geodesic_dir(Point("h3", [1, 0, 0, 0]), Point("h3", [np.cosh(1), np.sinh(1), 0, 0]))
    np.testing.assert_allclose(v.comps, [0, 1, 0, 0], atol=1e-14)
    with pytest.raises(Singular):
        geodesic_dir(Point("s3", [1, 0, 0, 0]), Point("s3", [1, 0, 0, 0]))
    with pytest.raises(Singular):
        geodesic_dir(Point("s3", [1, 0, 0, 0]), Point("s3", [-1, 0, 0, 0]))


def test_point_membership_and_tags():
    with pytest.raises(NotOnManifold):
        Point("s3", [1.1, 0, 0, 0])
    with pytest.raises(NotOnManifold):
        Point("h3", [2, 0, 0, 0])
    with pytest.raises(TagMismatch):
        distance(Point("s3", [1, 0, 0, 0]), Point("h3", [1, 0, 0, 0]))


def test_quaternion_table():
    i, j, k = np.eye(4)[1:]
    np.testing.assert_array_equal(quat_mul(i, j), k)
    np.testing.assert_array_equal(quat_mul(j, i), -k)
    a = np.array([0.3, -0.2, 0.5, 0.7])
    np.testing.assert_allclose(quat_mul(a, quat_conj(a)) / (a @ a), [1, 0, 0, 0], atol=1e-15)


@given(seeds)
def test_quaternion_associative(seed):
    a, b, c = np.random.default_rng(seed).normal(size=(3, 4))
    np.testing.assert_allclose(quat_mul(quat_mul(a, b), c), quat_mul(a, quat_mul(b, c)), atol=1e-12)


def test_left_translate_example():
    x = Point("s3", [1, 0, 0, 0])
    y = Point("s3", [0, 0, 1, 0])
    out = left_translate(x, y, TangentVec(x, [0, 1, 0, 0]))
    np.testing.assert_allclose(out.comps, [0, 0, 0, -1], atol=1e-15)
    same = left_translate(y, y, TangentVec(y, [0, 1, 0, 0]))
    np.testing.assert_allclose(same.comps, [0, 1, 0, 0])


def test_triple_product_examples():
    e = np.eye(4)
    # [e1, e2, e3] . e0 = det(e1, e2, e3, e0) = -1
    np.testing.assert_allclose(triple(e[1], e[2], e[3]), -e[0])
    np.testing.assert_allclose(triple(e[1], e[1], e[3]), 0)
    # tangent cross at the identity: i x j = k
    x = Point("s3", e[0])
    out = tangent_cross(x, TangentVec(x, e[1]), TangentVec(x, e[2]))
    np.testing.assert_allclose(out.comps, e[3])
    np.testing.assert_allclose(tangent_cross(x, TangentVec(x, e[1]), TangentVec(x, 2 * e[1])).comps, 0)


def test_minkowski_examples():
    e = np.eye(4)
    assert minkowski_form(e[0], e[0]) == 1
    assert minkowski_form(e[1], e[1]) == -1
    assert minkowski_form(e[0], e[1]) == 0


def test_exp_map_examples():
    x = Point("s3", [1, 0, 0, 0])
    np.testing.assert_allclose(exp_map(x, TangentVec(x, [0, 1, 0, 0]), np.pi / 2).coords, [0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(exp_map(x, TangentVec(x, [0, 1, 0, 0]), 0.0).coords, x.coords)
    h = Point("h3", [1, 0, 0, 0])
    y = exp_map(h, TangentVec(h, [0, 0, 1, 0]), 1.7)
    assert distance(h, y) == pytest.approx(1.7, abs=1e-12)


@pytest.mark.parametrize("tag", SPACES)
def test_basis_orthonormal_and_positive(tag, rng):
    g = geometry(tag)
    for _ in range(5):
        x = random_point(tag, rng)
        B = g.basis(x)
        np.testing.assert_allclose(g.inner(B[:, None, :], B[None, :, :]), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(g.cross(x, B[0], B[1]), B[2], atol=1e-12)


@pytest.mark.parametrize("tag", ["s3", "h3"])
@given(seed=seeds)
def test_transport_properties(tag, seed):
    rng = np.random.default_rng(seed)
    g = geometry(tag)
    x, y = random_point(tag, rng), random_point(tag, rng)
    if tag == "s3" and g.distance(x, y) > np.pi - 1e-3:
        return
    v = random_tangent(tag, x, rng)
    w = g.transport(x, y, v)
    assert abs(g.form(w, y)) < 1e-10
    assert g.norm(w) == pytest.approx(g.norm(v), rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(g.transport(y, x, w), v, atol=1e-10)
    # the geodesic tangent continues
    if g.distance(x, y) > 1e-6:
        np.testing.assert_allclose(g.transport(x, y, g.geodesic_dir(x, y)), -g.geodesic_dir(y, x), atol=1e-9)


def test_transport_fixes_complement():
    x = Point("s3", [1, 0, 0, 0])
    y = Point("s3", [np.cos(1), np.sin(1), 0, 0])
    v = TangentVec(x, [0, 0, 0.3, -0.4])
    np.testing.assert_allclose(parallel_transport(x, y, v).comps, v.comps)
    with pytest.raises(AmbiguousTransport):
        parallel_transport(x, Point("s3", [-1, 0, 0, 0]), v)


@given(seeds)
def test_left_translation_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    g = geometry("s3")
    x, y = Point("s3", random_point("s3", rng)), Point("s3", random_point("s3", rng))
    v = TangentVec(x, random_tangent("s3", x.coords, rng))
    assert left_translate(x, y, v).norm() == pytest.approx(v.norm(), rel=1e-12)
    assert abs(g.form(left_translate(x, y, v).comps, y.coords)) < 1e-12


@pytest.mark.parametrize("tag", SPACES)
@given(seed=seeds)
def test_lagrange_identity(tag, seed):
    rng = np.random.default_rng(seed)
    g = geometry(tag)
    x = random_point(tag, rng)
    u, v = random_tangent(tag, x, rng), random_tangent(tag, x, rng)
    c = g.cross(x, u, v)
    lhs = g.inner(c, c)
    rhs = g.inner(u, u) * g.inner(v, v) - g.inner(u, v) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
    assert abs(g.inner(c, u)) < 1e-10 and abs(g.inner(c, v)) < 1e-10


@given(seeds)
def test_double_triple_identity(seed):
    rng = np.random.default_rng(seed)
    g = geometry("s3")
    x, y = random_point("s3", rng), random_point("s3", rng)
    V = random_tangent("s3", x, rng)
    a = g.distance(x, y)
    lhs = triple(y, x, triple(y, x, V))
    rhs = -np.sin(a) ** 2 * V + (V @ y) * y - np.cos(a) * (V @ y) * x
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_curl_of_triple_with_fixed_x(rng):
    from curvedlink.fields import fd_curl

    g = geometry("s3")
    for _ in range(5):
        x, y = random_point("s3", rng), random_point("s3", rng)
        V = random_tangent("s3", x, rng)

        def F(P, x=x, V=V):
            return g.project(P, triple(np.broadcast_to(x, P.shape), np.broadcast_to(V, P.shape), P))

        c = fd_curl(F, "s3", y, 1e-4, order=2)
        expected = 2 * (x @ y) * V - 2 * (V @ y) * x
        np.testing.assert_allclose(c, expected, atol=1e-6)


@pytest.mark.parametrize("tag", SPACES)
def test_grad_distance_directional(tag, rng):
    g = geometry(tag)
    for _ in range(5):
        x, y = random_point(tag, rng), random_point(tag, rng)
        if tag == "s3" and g.distance(x, y) > 3.0:
            continue
        w = random_tangent(tag, y, rng)
        h = 1e-5
        n = g.norm(w)
        yp = g.exp(y, w / n, h)
        ym = g.exp(y, w / n, -h)
        fd = (g.distance(x, yp) - g.distance(x, ym)) / (2 * h) * n
        gd = grad_distance(Point(tag, x, tol=1e-9), Point(tag, y, tol=1e-9)).comps
        assert fd == pytest.approx(g.inner(gd, w), abs=1e-6)


@pytest.mark.parametrize("tag", SPACES)
def test_random_isometry_preserves_distance(tag, rng):
    g = geometry(tag)
    on_p, on_v = random_isometry(tag, rng)
    x, y = random_point(tag, rng), random_point(tag, rng)
    assert g.distance(on_p(x), on_p(y)) == pytest.approx(g.distance(x, y), rel=1e-10)
    u, v = random_tangent(tag, x, rng), random_tangent(tag, x, rng)
    # orientation preserving: the cross product commutes with the map
    np.testing.assert_allclose(on_v(g.cross(x, u, v)), g.cross(on_p(x), on_v(u), on_v(v)), atol=1e-10)


def test_triple_product_h3_sign():
    e = np.eye(4)
    g = geometry("h3")
    np.testing.assert_allclose(triple_product(e[0], e[1], e[2], SpaceTag.H3), g.cross(e[0], e[1], e[2]))
    np.testing.assert_allclose(g.cross(e[0], e[1], e[2]), e[3])
