import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvedlink.errors import InvalidInput, Singular
from curvedlink.kernels import (ANTIPODE_SERIES, KERNELS, KernelId, average_value, get_kernel, kernel_deriv, kernel_grad,
                                kernel_second_deriv, kernel_value, radial_laplacian)
from curvedlink.space import Point, geometry

PI = np.pi
ALPHA_S3 = np.linspace(0.05, PI - 0.05, 50)
ALPHA_H3 = np.linspace(0.05, 4.0, 50)


def _phi1_average_exact():
    # int_0^pi a (2 pi - a) sin^2 a da = pi^3 / 3 + pi / 4, integrated by parts
    return -(PI**2 / 3 + 0.25) / (8 * PI**2)


def test_values():
    assert kernel_value("s3_lap", PI / 2) == pytest.approx(0.0, abs=1e-17)
    assert kernel_value("s3_shift", PI / 2) == pytest.approx(-1 / (8 * PI), rel=1e-14)
    for a in (1e-3, 1e-4, 1e-5):
        assert a * kernel_value("h3_shift", a) == pytest.approx(-1 / (4 * PI), rel=1e-6)
    assert kernel_deriv("s3_phi1", PI) == pytest.approx(0.0, abs=1e-17)
    assert kernel_deriv("r3_newton", 1.0) == pytest.approx(1 / (4 * PI), rel=1e-14)


def test_removable_values_at_antipode():
    # (pi - a) cot a -> -1 and (pi - a) csc a -> 1 as a -> pi
    assert kernel_value("s3_lap", PI) == pytest.approx(1 / (4 * PI**2), rel=1e-14)
    assert kernel_value("s3_shift", PI) == pytest.approx(-1 / (4 * PI**2), rel=1e-14)
    for kid in ("s3_lap", "s3_shift", "s3_phi2"):
        k = get_kernel(kid)
        for f in (k.value, k.d1, k.d2, k.grad_factor):
            # straddle the switch from closed form to series
            left, right = f(PI - ANTIPODE_SERIES - 1e-10), f(PI - ANTIPODE_SERIES + 1e-10)
            assert left == pytest.approx(right, rel=1e-9, abs=1e-10)


def test_domain_errors():
    with pytest.raises(Singular):
        kernel_value("s3_lap", 0.0)
    with pytest.raises(InvalidInput):
        kernel_value("s3_lap", 4.0)
    with pytest.raises(InvalidInput):
        kernel_value("h3_shift", -1.0)
    with pytest.raises(InvalidInput):
        get_kernel("nope")
    assert kernel_value("s3_cos", 0.0) == 1.0


@pytest.mark.parametrize("kid", list(KernelId))
def test_derivatives_match_finite_differences(kid):
    k = get_kernel(kid)
    alphas = ALPHA_H3 if k.tag.value != "s3" else ALPHA_S3
    h = 1e-5
    for a in alphas[5:-5:7]:
        d1 = (k.value(a + h) - k.value(a - h)) / (2 * h)
        d2 = (k.d1(a + h) - k.d1(a - h)) / (2 * h)
        assert k.d1(a) == pytest.approx(d1, rel=1e-7, abs=1e-7)
        assert k.d2(a) == pytest.approx(d2, rel=1e-7, abs=1e-7)
        S = geometry(k.tag).S(a)
        assert k.grad_factor(a) == pytest.approx(k.d1(a) / S, rel=1e-12, abs=1e-14)


def test_ode_suite():
    avg0 = average_value("s3_lap")
    avg1 = average_value("s3_phi1")
    lap = lambda kid, a: KERNELS[KernelId(kid)].radial_laplacian(a)  # noqa: E731
    val = lambda kid, a: KERNELS[KernelId(kid)].value(a)  # noqa: E731
    np.testing.assert_allclose(lap("s3_lap", ALPHA_S3), -1 / (2 * PI**2), atol=1e-8)
    np.testing.assert_allclose(lap("s3_shift", ALPHA_S3) - val("s3_shift", ALPHA_S3), 0, atol=1e-8)
    np.testing.assert_allclose(lap("h3_shift", ALPHA_H3) + val("h3_shift", ALPHA_H3), 0, atol=1e-8)
    np.testing.assert_allclose(lap("s3_phi1", ALPHA_S3), val("s3_lap", ALPHA_S3) - avg0, atol=1e-8)
    np.testing.assert_allclose(lap("s3_phi2", ALPHA_S3), val("s3_phi1", ALPHA_S3) - avg1, atol=1e-8)
    np.testing.assert_allclose(lap("r3_newton", ALPHA_H3), 0, atol=1e-10)
    np.testing.assert_allclose(lap("h3_lap", ALPHA_H3), 0, atol=1e-10)


def test_averages():
    assert average_value("s3_phi1") == pytest.approx(_phi1_average_exact(), rel=1e-12)
    assert average_value("s3_cos") == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidInput):
        average_value("h3_shift")


def test_radial_laplacian_public():
    assert radial_laplacian("s3_cos", 0.0) == pytest.approx(-3.0)
    with pytest.raises(Singular):
        radial_laplacian("s3_lap", PI)


def test_gradient_at_antipode_is_zero():
    x = Point("s3", [1, 0, 0, 0])
    y = Point("s3", [-1, 0, 0, 0])
    np.testing.assert_allclose(kernel_grad("s3_shift", x, y).comps, 0, atol=1e-16)
    with pytest.raises(Singular):
        kernel_grad("s3_shift", x, x)


@pytest.mark.parametrize("kid", ["s3_shift", "s3_lap", "h3_shift", "r3_newton"])
@given(seed=st.integers(0, 2**32 - 1))
def test_gradient_direction_and_fd(kid, seed):
    rng = np.random.default_rng(seed)
    k = get_kernel(kid)
    g = geometry(k.tag)
    if k.tag.value == "r3":
        x, y = rng.normal(size=3), rng.normal(size=3)
    elif k.tag.value == "s3":
        x, y = g.reproject(rng.normal(size=(2, 4)))
    else:
        v = rng.normal(size=(2, 3)) * 0.6
        x, y = np.concatenate([np.sqrt(1 + np.sum(v**2, axis=1))[:, None], v], axis=1)
    a = float(g.distance(x, y))
    if a < 0.05 or (k.tag.value == "s3" and a > PI - 0.05):
        return
    grad = kernel_grad(kid, Point(k.tag, x, tol=1e-9), Point(k.tag, y, tol=1e-9)).comps
    away = -g.geodesic_dir(y, x)
    assert g.inner(grad, away) == pytest.approx(float(k.d1(a)), rel=1e-9, abs=1e-12)
    w = rng.normal(size=3) @ g.basis(y)
    h = 1e-4
    n = g.norm(w)
    fd = (k.value(g.distance(x, g.exp(y, w / n, h))) - k.value(g.distance(x, g.exp(y, w / n, -h)))) / (2 * h) * n
    assert g.inner(grad, w) == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_second_derivative_public():
    assert kernel_second_deriv("s3_phi1", 1.0) == pytest.approx(2 / (16 * PI**2))
