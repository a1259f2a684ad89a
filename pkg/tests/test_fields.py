import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvedlink.errors import InvalidInput, TagMismatch
from curvedlink.fields import (FieldSpec, ScalarSpec, bump_field, curl, divergence, eval_field, fd_curl, frame_at,
                               fd_divergence, fd_gradient, field_from_name, gradient_field, l2_inner, l2_norm,
                               left_invariant, random_smooth_field, right_invariant, sample_field,
                               scalar_from_name, vector_laplacian)
from curvedlink.quadrature import S3Grid, default_grid
from curvedlink.space import Point, TangentVec, geometry, left_translate

PI = np.pi
seeds = st.integers(0, 2**32 - 1)


def _s3_points(rng, n):
    return geometry("s3").reproject(rng.normal(size=(n, 4)))


def test_left_invariant_at_identity():
    np.testing.assert_allclose(eval_field(left_invariant(1, 0, 0), np.array([1.0, 0, 0, 0])), [0, 1, 0, 0])


def test_left_invariance(rng):
    V = left_invariant(0.3, -1.2, 0.5)
    x, y = _s3_points(rng, 2)
    moved = left_translate(Point("s3", x), Point("s3", y), TangentVec(Point("s3", x), eval_field(V, x)))
    np.testing.assert_allclose(moved.comps, eval_field(V, y), atol=1e-12)


@pytest.mark.parametrize("tag", ["r3", "s3", "h3"])
def test_bump_vanishes_outside_support(tag):
    g = geometry(tag)
    far = g.exp(g.origin(), g.basis(g.origin())[0], 1.5)
    for variant in ("rotational", "gradient"):
        F = bump_field(tag, variant, radius=1.0)
        np.testing.assert_array_equal(eval_field(F, far), 0.0)
        assert F.support_radius() == 1.0


@given(seeds)
def test_invariant_fields_are_curl_eigenfields(seed):
    rng = np.random.default_rng(seed)
    a, b, c = rng.normal(size=3)
    x = _s3_points(rng, 1)[0]
    for F, lam in ((left_invariant(a, b, c), -2.0), (right_invariant(a, b, c), 2.0)):
        V = eval_field(F, x)
        np.testing.assert_allclose(curl(F, x, method="fd", order=4), lam * V, atol=1e-6)
        assert abs(divergence(F, x, method="fd", order=4)) < 1e-6


def test_vector_laplacian_of_left_invariant(rng):
    F = left_invariant(1, 0, 0)
    for x in _s3_points(rng, 3):
        np.testing.assert_allclose(vector_laplacian(F, x, method="fd", order=4), -4 * eval_field(F, x), atol=1e-4)
        np.testing.assert_allclose(vector_laplacian(F, x), -4 * eval_field(F, x))


def test_gradient_fields(rng):
    for name, mu in (("grad_coord", -3.0), ("grad_coord_product", -8.0)):
        F = field_from_name(name)
        for x in _s3_points(rng, 3):
            np.testing.assert_allclose(curl(F, x, method="fd", order=4), 0.0, atol=1e-6)
            f = F.scalar.value(x)
            assert divergence(F, x, method="fd", order=4) == pytest.approx(mu * f, abs=1e-6)
            np.testing.assert_allclose(vector_laplacian(F, x, method="fd", order=4), mu * eval_field(F, x),
                                       atol=1e-4)


@pytest.mark.parametrize("tag", ["r3", "s3", "h3"])
def test_bump_rotational_divergence_free(tag, rng):
    g = geometry(tag)
    F = bump_field(tag, "rotational", radius=1.0, axis=(0.2, -0.4, 1.0))
    fn = lambda p: eval_field(F, p)  # noqa: E731
    B = g.basis(g.origin())
    for _ in range(3):
        x = g.exp(g.origin(), rng.normal(size=3) @ B / 3, 1.0)
        assert abs(fd_divergence(fn, tag, x, 1e-3, 4)) < 1e-7


@pytest.mark.parametrize("tag", ["r3", "h3", "s3"])
def test_bump_gradient_curl_free(tag, rng):
    g = geometry(tag)
    F = bump_field(tag, "gradient", radius=1.0)
    fn = lambda p: eval_field(F, p)  # noqa: E731
    x = g.exp(g.origin(), g.basis(g.origin())[1], 0.4)
    np.testing.assert_allclose(fd_curl(fn, tag, x, 1e-3, 4), 0.0, atol=1e-8)


def test_fd_curl_euclidean_rotation():
    fn = lambda p: np.stack([-p[..., 1], p[..., 0], 0 * p[..., 0]], axis=-1)  # noqa: E731
    np.testing.assert_allclose(fd_curl(fn, "r3", np.array([0.3, -0.2, 0.5])), [0, 0, 2], atol=1e-9)


def test_fd_gradient_matches_scalar_gradient(rng):
    s = ScalarSpec("s3", "coord_product", (1, 3))
    x = _s3_points(rng, 1)[0]
    np.testing.assert_allclose(fd_gradient(s.value, "s3", x, 1e-3, 4), s.gradient(x), atol=1e-9)


def test_l2_pairing():
    G = default_grid("s3")
    V1, V2 = left_invariant(1, 0, 0), left_invariant(0, 1, 0)
    assert l2_inner(V1, V1, G) == pytest.approx(2 * PI**2, rel=1e-3)
    assert abs(l2_inner(V1, V2, G)) < 1e-10
    assert l2_norm(V1, G) == pytest.approx(np.sqrt(2) * PI, rel=1e-3)


def test_left_right_pairing_vanishes_under_refinement():
    L, R = left_invariant(1, 0, 0), right_invariant(0, 1, 0)
    coarse = l2_inner(L, R, S3Grid.build(8, 16, 16))
    fine = l2_inner(L, R, S3Grid.build(16, 32, 32))
    assert abs(fine) < 1e-10 and abs(coarse) < 1e-10


def test_l2_tag_mismatch():
    with pytest.raises(TagMismatch):
        l2_inner(left_invariant(), bump_field("r3"), default_grid("s3", scale=0.25))


def test_sampled_field_converges():
    F = random_smooth_field(np.random.default_rng(3))
    pts = _s3_points(np.random.default_rng(4), 400)
    errs = []
    for shape in ((16, 32, 32), (32, 64, 64)):
        S = sample_field(F, "s3", shape)
        errs.append(np.linalg.norm(eval_field(S, pts) - eval_field(F, pts), axis=1).mean())
    # mean error: near the two degenerate Hopf circles the components go like sqrt(u) and converge slower
    assert errs[1] < errs[0] / 2.5
    H = sample_field(bump_field("h3", "rotational"), "h3", (24, 24, 24), 1.2)
    q = geometry("h3").exp(np.array([1.0, 0, 0, 0]), np.array([0, 0.6, 0.0, 0.8]), 0.5)
    np.testing.assert_allclose(eval_field(H, q), eval_field(bump_field("h3", "rotational"), q), atol=5e-2)
    with pytest.raises(InvalidInput):
        eval_field(H, geometry("h3").exp(np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0]), 3.0))


def test_registry_names():
    for name in ("left_invariant", "right_invariant", "zero", "polynomial", "random_smooth", "grad_coord",
                 "grad_coord_product"):
        F = field_from_name(name)
        assert F.tag.value == "s3"
    assert field_from_name("bump_rotational", "h3").tag.value == "h3"
    assert field_from_name("grad_bump", "r3").kind == "gradient"
    assert field_from_name("bump_rotational", space="h3").tag.value == "h3"
    assert scalar_from_name("bump", space="h3").tag.value == "h3"
    with pytest.raises(TagMismatch):
        field_from_name("bump_rotational", "r3", space="h3")
    with pytest.raises(InvalidInput):
        field_from_name("bump_rotational", space="s2")
    with pytest.raises(InvalidInput):
        field_from_name("bump_rotational", radus="0.5")
    with pytest.raises(InvalidInput):
        scalar_from_name("coord", seed="1")
    assert scalar_from_name("coord", index="2").index == (2,)
    with pytest.raises(InvalidInput):
        field_from_name("swirl")
    with pytest.raises(InvalidInput):
        FieldSpec("h3", "left_invariant")
    with pytest.raises(InvalidInput):
        ScalarSpec("s3", "coord_product", (1, 1))
    with pytest.raises(InvalidInput):
        curl(field_from_name("polynomial"), np.array([1.0, 0, 0, 0]), method="analytic")


def test_polynomial_field_tangent(rng):
    F = random_smooth_field(rng)
    X = _s3_points(rng, 20)
    np.testing.assert_allclose(np.sum(eval_field(F, X) * X, axis=1), 0.0, atol=1e-12)
    assert F.is_divergence_free() is None
    assert gradient_field(ScalarSpec("s3", "coord")).is_divergence_free() is False


def test_div_curl_vanishes(rng):
    F = random_smooth_field(rng)
    for x in _s3_points(rng, 3):
        assert abs(fd_divergence(lambda P: curl(F, P, method="fd", order=4), "s3", x, 1e-3, 4)) < 1e-8


def test_frames_orthonormal(rng):
    X = _s3_points(rng, 1000)
    E = frame_at("s3", X).vectors
    np.testing.assert_allclose(np.einsum("nij,nkj->nik", E, E), np.broadcast_to(np.eye(3), (1000, 3, 3)), atol=1e-12)
    np.testing.assert_allclose(np.einsum("nij,nj->ni", E, X), 0.0, atol=1e-12)


@pytest.mark.parametrize("spec", [left_invariant(1, 2, 3), right_invariant(1, 0, -1),
                                  gradient_field(ScalarSpec("s3", "coord_product", (0, 2)))])
def test_analytic_and_fd_operators_agree(spec, rng):
    for x in _s3_points(rng, 3):
        np.testing.assert_allclose(curl(spec, x, method="analytic"), curl(spec, x, method="fd", order=4), atol=1e-5)
        assert divergence(spec, x, method="analytic") == pytest.approx(divergence(spec, x, method="fd", order=4),
                                                                         abs=1e-5)
        np.testing.assert_allclose(vector_laplacian(spec, x, method="analytic"),
                                   vector_laplacian(spec, x, method="fd", order=4), atol=1e-5)
