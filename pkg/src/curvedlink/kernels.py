"""Radial kernel functions phi(alpha) and their calculus.

All kernels are stored in signed form, constants included (for example
``s3_shift = -(pi - alpha) csc(alpha) / (4 pi^2)``).  Integral routines
that quote positive-prefactor formulas convert explicitly.

Besides value and two derivatives every kernel provides the *gradient
factor* ``phi'(alpha) / S(alpha)`` with ``S = sin, sinh`` or the identity.
With it the gradient in ``y`` of ``phi(alpha(x, y))`` is

    grad_factor(alpha) * (C(alpha) y - x)

which stays finite at the antipode of S^3 where ``phi'`` vanishes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InvalidInput, Singular
from .space import Point, SpaceTag, TangentVec, _same_tag, geometry

PI = np.pi
# below this distance from the antipode the S^3 closed forms switch to series
ANTIPODE_SERIES = 1e-2


def _near_pi(alpha, exact, series):
    alpha = np.asarray(alpha, dtype=float)
    t = PI - alpha
    small = np.abs(t) < ANTIPODE_SERIES
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, series(t), exact(np.where(small, 1.0, t)))
    return out


# (pi - a) cot a and its derivatives, written in t = pi - a
def _h(a):
    return _near_pi(a, lambda t: -t / np.tan(t),
                    lambda t: -1 + t**2 / 3 + t**4 / 45 + 2 * t**6 / 945 + t**8 / 4725)


def _dh(a):
    return _near_pi(a, lambda t: 1 / np.tan(t) - t / np.sin(t) ** 2,
                    lambda t: -2 * t / 3 - 4 * t**3 / 45 - 4 * t**5 / 315 - 8 * t**7 / 4725 - 4 * t**9 / 18711)


def _d2h(a):
    return _near_pi(a, lambda t: 2 * (1 - t / np.tan(t)) / np.sin(t) ** 2,
                    lambda t: 2 / 3 + 4 * t**2 / 15 + 4 * t**4 / 63 + 8 * t**6 / 675 + 4 * t**8 / 2079)


def _gh(a):
    return _near_pi(a, lambda t: (1 / np.tan(t) - t / np.sin(t) ** 2) / np.sin(t),
                    lambda t: -2 / 3 - t**2 / 5 - 17 * t**4 / 420 - 29 * t**6 / 4200 - 1181 * t**8 / 1108800)


# (pi - a) csc a and its derivatives
def _k(a):
    return _near_pi(a, lambda t: t / np.sin(t),
                    lambda t: 1 + t**2 / 6 + 7 * t**4 / 360 + 31 * t**6 / 15120 + 127 * t**8 / 604800)


def _dk(a):
    return _near_pi(a, lambda t: (t * np.cos(t) - np.sin(t)) / np.sin(t) ** 2,
                    lambda t: -t / 3 - 7 * t**3 / 90 - 31 * t**5 / 2520 - 127 * t**7 / 75600 - 73 * t**9 / 342144)


def _d2k(a):
    return _near_pi(
        a,
        lambda t: -2 / (np.sin(t) * np.tan(t)) + t / np.sin(t) * (1 / np.tan(t) ** 2 + 1 / np.sin(t) ** 2),
        lambda t: 1 / 3 + 7 * t**2 / 30 + 31 * t**4 / 504 + 127 * t**6 / 10800 + 73 * t**8 / 38016,
    )


def _gk(a):
    return _near_pi(a, lambda t: (t * np.cos(t) - np.sin(t)) / np.sin(t) ** 3,
                    lambda t: -1 / 3 - 2 * t**2 / 15 - 2 * t**4 / 63 - 4 * t**6 / 675 - 2 * t**8 / 2079)


def _P(a):
    return a * (2 * PI - a)


def _dP(a):
    return 2 * (PI - a)


class KernelId(str, enum.Enum):
    R3_NEWTON = "r3_newton"
    S3_LAP = "s3_lap"
    S3_SHIFT = "s3_shift"
    S3_PHI1 = "s3_phi1"
    S3_PHI2 = "s3_phi2"
    H3_SHIFT = "h3_shift"
    H3_LAP = "h3_lap"
    # smooth test kernels
    S3_COS = "s3_cos"
    H3_SECH = "h3_sech"


@dataclass(frozen=True)
class Kernel:
    id: KernelId
    tag: SpaceTag
    value: Callable
    d1: Callable
    d2: Callable
    grad_factor: Callable
    smooth: bool = False
    ode: str = ""

    def radial_laplacian(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if self.tag is SpaceTag.S3:
            # 2 cot(a) phi' = 2 cos(a) * (phi'/sin a); finite up to the antipode
            return self.d2(alpha) + 2 * np.cos(alpha) * self.grad_factor(alpha)
        if self.tag is SpaceTag.H3:
            return self.d2(alpha) + 2 * np.cosh(alpha) * self.grad_factor(alpha)
        return self.d2(alpha) + 2 * self.grad_factor(alpha)


def _mk(kid, tag, v, d1, d2, g, smooth=False, ode=""):
    return Kernel(KernelId(kid), SpaceTag(tag), v, d1, d2, g, smooth, ode)


_c0 = -1 / (4 * PI**2)
_c1 = -1 / (16 * PI**2)
_c2 = -1 / (192 * PI**2)
_ch = -1 / (4 * PI)

KERNELS = {
    k.id: k
    for k in [
        _mk("r3_newton", "r3",
            lambda a: _ch / a, lambda a: -_ch / a**2, lambda a: 2 * _ch / a**3, lambda a: -_ch / a**3,
            ode="laplace"),
        _mk("s3_lap", "s3",
            lambda a: _c0 * _h(a), lambda a: _c0 * _dh(a), lambda a: _c0 * _d2h(a), lambda a: _c0 * _gh(a),
            ode="laplace-average"),
        _mk("s3_shift", "s3",
            lambda a: _c0 * _k(a), lambda a: _c0 * _dk(a), lambda a: _c0 * _d2k(a), lambda a: _c0 * _gk(a),
            ode="shift-minus"),
        _mk("s3_phi1", "s3",
            lambda a: _c1 * _P(a), lambda a: _c1 * _dP(a), lambda a: _c1 * (-2.0 + 0 * a),
            lambda a: _c1 * 2 * _k(a),
            ode="chain1"),
        _mk("s3_phi2", "s3",
            lambda a: _c2 * _P(a) * (3 + 2 * _h(a)),
            lambda a: _c2 * (_dP(a) * (3 + 2 * _h(a)) + 2 * _P(a) * _dh(a)),
            lambda a: _c2 * (-2 * (3 + 2 * _h(a)) + 4 * _dP(a) * _dh(a) + 2 * _P(a) * _d2h(a)),
            lambda a: _c2 * (2 * _k(a) * (3 + 2 * _h(a)) + 2 * _P(a) * _gh(a)),
            ode="chain2"),
        _mk("h3_shift", "h3",
            lambda a: _ch / np.sinh(a),
            lambda a: -_ch * np.cosh(a) / np.sinh(a) ** 2,
            lambda a: _ch * (np.cosh(a) ** 2 + 1) / np.sinh(a) ** 3,
            lambda a: -_ch * np.cosh(a) / np.sinh(a) ** 3,
            ode="shift-plus"),
        _mk("h3_lap", "h3",
            lambda a: _ch * np.cosh(a) / np.sinh(a),
            lambda a: -_ch / np.sinh(a) ** 2,
            lambda a: 2 * _ch * np.cosh(a) / np.sinh(a) ** 3,
            lambda a: -_ch / np.sinh(a) ** 3,
            ode="laplace"),
        _mk("s3_cos", "s3",
            np.cos, lambda a: -np.sin(a), lambda a: -np.cos(a), lambda a: -1.0 + 0 * np.asarray(a),
            smooth=True),
        _mk("h3_sech", "h3",
            lambda a: 1 / np.cosh(a),
            lambda a: -np.tanh(a) / np.cosh(a),
            lambda a: (np.tanh(a) ** 2 - 1 / np.cosh(a) ** 2) / np.cosh(a),
            lambda a: -1 / np.cosh(a) ** 2,
            smooth=True),
    ]
}

SHIFT_KERNEL = {SpaceTag.S3: KernelId.S3_SHIFT, SpaceTag.H3: KernelId.H3_SHIFT, SpaceTag.R3: KernelId.R3_NEWTON}
LAPLACE_KERNEL = {SpaceTag.S3: KernelId.S3_LAP, SpaceTag.H3: KernelId.H3_LAP, SpaceTag.R3: KernelId.R3_NEWTON}


def get_kernel(kid) -> Kernel:
    if isinstance(kid, Kernel):
        return kid
    try:
        return KERNELS[KernelId(kid)]
    except ValueError:
        raise InvalidInput(f"unknown kernel {kid!r}") from None


def _check_alpha(k: Kernel, alpha: float) -> float:
    alpha = float(alpha)
    if alpha == 0.0 and not k.smooth:
        raise Singular(f"{k.id.value} is singular at alpha = 0")
    if alpha < 0 or (k.tag is SpaceTag.S3 and alpha > PI):
        raise InvalidInput(f"alpha = {alpha} outside the domain of {k.id.value}")
    return alpha


def kernel_value(kid, alpha: float) -> float:
    k = get_kernel(kid)
    return float(k.value(_check_alpha(k, alpha)))


def kernel_deriv(kid, alpha: float) -> float:
    k = get_kernel(kid)
    return float(k.d1(_check_alpha(k, alpha)))


def kernel_second_deriv(kid, alpha: float) -> float:
    k = get_kernel(kid)
    return float(k.d2(_check_alpha(k, alpha)))


def radial_laplacian(kid, alpha: float) -> float:
    k = get_kernel(kid)
    alpha = _check_alpha(k, alpha)
    if k.tag is SpaceTag.S3 and alpha >= PI and not k.smooth:
        raise Singular("radial Laplacian requested at the antipode")
    return float(k.radial_laplacian(alpha))


def grad_array(k: Kernel, x, y):
    """Vectorised gradient in ``y`` of ``phi(alpha(x, y))``, ambient coords."""
    g = geometry(k.tag)
    a = g.distance(x, y)
    return k.grad_factor(a)[..., None] * (g.C(a)[..., None] * y - x)


def kernel_grad(kid, x: Point, y: Point) -> TangentVec:
    k = get_kernel(kid)
    tag = _same_tag(x, y)
    if tag is not k.tag:
        raise InvalidInput(f"kernel {k.id.value} lives on {k.tag.value}, points on {tag.value}")
    g = geometry(tag)
    a = float(g.distance(x.coords, y.coords))
    if a == 0.0 and not k.smooth:
        raise Singular("kernel gradient at coincident points")
    v = grad_array(k, x.coords, y.coords)
    return TangentVec(y, g.project(y.coords, v))


def average_value(kid, epsrel: float = 1e-12) -> float:
    """Mean of an S^3 kernel over the sphere, by adaptive quadrature in alpha."""
    k = get_kernel(kid)
    if k.tag is not SpaceTag.S3:
        raise InvalidInput("average values are defined for S^3 kernels only")

    def f(a):
        return float(k.value(a)) * 4 * PI * np.sin(a) ** 2

    val, _ = integrate.quad(f, 0.0, PI, epsabs=1e-13, epsrel=epsrel, limit=200)
    return val / (2 * PI**2)
