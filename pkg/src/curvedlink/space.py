"""Ambient-coordinate geometry of R^3, S^3 and H^3.

Points of S^3 are unit vectors of R^4 (also read as unit quaternions
``w + x i + y j + z k``); points of H^3 lie on the upper sheet of the
hyperboloid ``<x, x> = 1`` in Minkowski space with signature (+, -, -, -).
Tangent vectors are stored in the same ambient coordinates.

The vectorised routines on :class:`Geometry` accept arrays of shape
``(..., d)`` and broadcast.  The thin typed layer (:class:`Point`,
:class:`TangentVec` and the module-level functions) validates tags and
manifold membership and is what the rest of the public API exposes.

Orientation: a basis ``(u, v, w)`` of ``T_x S^3`` is positive when
``det(x, u, v, w) > 0``; at the identity this makes ``i x j = k``.  The
same rule with the sign adjusted for the Minkowski form is used on H^3 so
that ``e1 x e2 = e3`` at ``e0``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousTransport, InvalidInput, NotOnManifold, Singular, TagMismatch

POINT_TOL = 1e-12
INPUT_TOL = 1e-10
TANGENT_TOL = 1e-10

MINKOWSKI = np.array([1.0, -1.0, -1.0, -1.0])


class SpaceTag(str, enum.Enum):
    R3 = "r3"
    S3 = "s3"
    H3 = "h3"

    @property
    def ambient_dim(self) -> int:
        return 3 if self is SpaceTag.R3 else 4


# ---------------------------------------------------------------------------
# quaternions and the R^4 triple product


def quat_mul(a, b):
    """Hamilton product of quaternions stored as ``(w, x, y, z)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def quat_conj(a):
    return np.asarray(a, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def quat_inv(a):
    a = np.asarray(a, dtype=float)
    return quat_conj(a) / np.sum(a * a, axis=-1, keepdims=True)


def triple(a, b, c):
    """Euclidean triple product ``[a, b, c]`` of vectors in R^4.

    Component ``m`` equals ``det(a, b, c, e_m)``, so the result is
    orthogonal to all three arguments, has length equal to the 3-volume
    they span and ``[a, b, c] . d = det(a, b, c, d)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    c0, c1, c2, c3 = np.moveaxis(c, -1, 0)

    def det3(p0, p1, p2, q0, q1, q2, r0, r1, r2):
        return p0 * (q1 * r2 - q2 * r1) - p1 * (q0 * r2 - q2 * r0) + p2 * (q0 * r1 - q1 * r0)

    d0 = det3(a1, a2, a3, b1, b2, b3, c1, c2, c3)
    d1 = det3(a0, a2, a3, b0, b2, b3, c0, c2, c3)
    d2 = det3(a0, a1, a3, b0, b1, b3, c0, c1, c3)
    d3 = det3(a0, a1, a2, b0, b1, b2, c0, c1, c2)
    return np.stack([-d0, d1, -d2, d3], axis=-1)


def det4(a, b, c, d):
    return np.sum(triple(a, b, c) * np.asarray(d, dtype=float), axis=-1)


def minkowski_form(a, b):
    """``<a, b> = a0 b0 - a1 b1 - a2 b2 - a3 b3``."""
    return np.sum(np.asarray(a, dtype=float) * MINKOWSKI * np.asarray(b, dtype=float), axis=-1)


# ---------------------------------------------------------------------------
# vectorised geometry


class Geometry:
    """Vectorised geometric primitives for one space.

    Geodesics are written uniformly as ``C(t) x + S(t) v`` with
    ``(C, S) = (cos, sin)``, ``(cosh, sinh)`` or ``(1, t)``.
    """

    tag: SpaceTag
    dim: int

    def C(self, t):
        raise NotImplementedError

    def S(self, t):
        raise NotImplementedError

    def form(self, a, b):
        """Ambient bilinear form in which points have unit length."""
        raise NotImplementedError

    def inner(self, u, v):
        """Tangent metric."""
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def project(self, x, w):
        """Orthogonal projection of an ambient vector onto ``T_x``."""
        raise NotImplementedError

    def cross(self, x, u, v):
        raise NotImplementedError

    def transport(self, x, y, v):
        """Parallel transport of ``v`` from ``x`` to ``y`` along the geodesic."""
        raise NotImplementedError

    def reproject(self, x):
        raise NotImplementedError

    def membership(self, x):
        """Residual of the manifold equation (0 on the manifold)."""
        raise NotImplementedError

    def norm(self, v):
        return np.sqrt(np.maximum(self.inner(v, v), 0.0))

    def exp(self, x, v, t):
        t = np.asarray(t, dtype=float)[..., None]
        return self.C(t) * x + self.S(t) * v

    def grad_distance(self, x, y):
        """Gradient in ``y`` of ``distance(x, y)``: unit, pointing away from x."""
        a = self.distance(x, y)[..., None]
        return (self.C(a) * y - x) / self.S(a)

    def geodesic_dir(self, x, y):
        a = self.distance(x, y)[..., None]
        return (y - self.C(a) * x) / self.S(a)

    def origin(self):
        e = np.zeros(self.dim)
        if self.tag is not SpaceTag.R3:
            e[0] = 1.0
        return e

    def basis(self, x):
        """Positively oriented orthonormal frame at each point, shape (..., 3, d)."""
        raise NotImplementedError


class EuclideanGeometry(Geometry):
    tag = SpaceTag.R3
    dim = 3

    def C(self, t):
        return np.ones_like(t)

    def S(self, t):
        return t

    def form(self, a, b):
        return np.sum(a * b, axis=-1)

    inner = form

    def distance(self, x, y):
        return np.linalg.norm(np.asarray(y, dtype=float) - x, axis=-1)

    def project(self, x, w):
        return np.asarray(w, dtype=float) + 0.0 * np.asarray(x)

    def cross(self, x, u, v):
        return np.cross(u, v)

    def transport(self, x, y, v):
        return np.asarray(v, dtype=float) + 0.0 * np.asarray(y)

    def reproject(self, x):
        return np.asarray(x, dtype=float)

    def membership(self, x):
        return np.zeros(np.shape(x)[:-1])

    def basis(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3)).copy()


class SphereGeometry(Geometry):
    tag = SpaceTag.S3
    dim = 4

    def C(self, t):
        return np.cos(t)

    def S(self, t):
        return np.sin(t)

    def form(self, a, b):
        return np.sum(a * b, axis=-1)

    inner = form

    def distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return 2.0 * np.arctan2(np.linalg.norm(x - y, axis=-1), np.linalg.norm(x + y, axis=-1))

    def project(self, x, w):
        return w - self.form(w, x)[..., None] * x

    def cross(self, x, u, v):
        return triple(x, u, v)

    def transport(self, x, y, v):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        denom = 1.0 + self.form(x, y)
        if np.any(denom <= 1e-14):
            raise AmbiguousTransport("parallel transport between antipodal points is undefined")
        return v - (self.form(v, y) / denom)[..., None] * (x + y)

    def reproject(self, x):
        x = np.asarray(x, dtype=float)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def membership(self, x):
        return np.sum(np.asarray(x) ** 2, axis=-1) - 1.0

    def basis(self, x):
        # left-invariant frame x i, x j, x k
        x = np.asarray(x, dtype=float)
        units = np.eye(4)[1:]
        return quat_mul(x[..., None, :], units)


class HyperbolicGeometry(Geometry):
    tag = SpaceTag.H3
    dim = 4

    def C(self, t):
        return np.cosh(t)

    def S(self, t):
        return np.sinh(t)

    def form(self, a, b):
        return minkowski_form(a, b)

    def inner(self, u, v):
        return -minkowski_form(u, v)

    def distance(self, x, y):
        d = np.asarray(y, dtype=float) - x
        q = np.maximum(-minkowski_form(d, d), 0.0)
        return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)

    def project(self, x, w):
        return w - self.form(w, x)[..., None] * x

    def cross(self, x, u, v):
        return -MINKOWSKI * triple(x, u, v)

    def transport(self, x, y, v):
        denom = 1.0 + self.form(x, y)
        return v - (self.form(v, y) / denom)[..., None] * (np.asarray(x) + y)

    def reproject(self, x):
        x = np.asarray(x, dtype=float)
        q = minkowski_form(x, x)
        if np.any(q <= 0) or np.any(x[..., 0] <= 0):
            raise NotOnManifold("vector is not timelike future-pointing")
        return x / np.sqrt(q)[..., None]

    def membership(self, x):
        return minkowski_form(x, x) - 1.0

    def basis(self, x):
        # coordinate frame at e0 transported along radial geodesics
        x = np.asarray(x, dtype=float)
        e0 = self.origin()
        units = np.eye(4)[1:]
        xb = np.broadcast_to(x[..., None, :], x.shape[:-1] + (3, 4))
        return self.transport(np.broadcast_to(e0, xb.shape), xb, units + 0.0 * xb)


_GEOMETRIES = {
    SpaceTag.R3: EuclideanGeometry(),
    SpaceTag.S3: SphereGeometry(),
    SpaceTag.H3: HyperbolicGeometry(),
}


def geometry(tag) -> Geometry:
    return _GEOMETRIES[SpaceTag(tag)]


# ---------------------------------------------------------------------------
# isometries (used to move grids and in invariance checks)


def boost_to(c):
    """Lorentz boost taking ``e0`` to the point ``c`` of H^3."""
    c = np.asarray(c, dtype=float)
    c0, cv = c[0], c[1:]
    B = np.empty((4, 4))
    B[0, 0] = c0
    B[0, 1:] = cv
    B[1:, 0] = cv
    B[1:, 1:] = np.eye(3) + np.outer(cv, cv) / (1.0 + c0)
    return B


def move_origin_to(tag, c, pts):
    """Apply a fixed orientation-preserving isometry taking the origin to ``c``.

    S^3 uses left multiplication by ``c``; H^3 the pure boost; R^3 the
    translation.  The map depends smoothly on ``c``.
    """
    tag = SpaceTag(tag)
    pts = np.asarray(pts, dtype=float)
    if tag is SpaceTag.S3:
        return quat_mul(np.asarray(c, dtype=float), pts)
    if tag is SpaceTag.H3:
        return pts @ boost_to(c).T
    return pts + np.asarray(c, dtype=float)


def move_vectors_from_origin(tag, c, vecs):
    """Differential of :func:`move_origin_to` applied to tangent vectors."""
    tag = SpaceTag(tag)
    vecs = np.asarray(vecs, dtype=float)
    if tag is SpaceTag.S3:
        return quat_mul(np.asarray(c, dtype=float), vecs)
    if tag is SpaceTag.H3:
        return vecs @ boost_to(c).T
    return vecs


def random_isometry(tag, rng):
    """Random orientation-preserving isometry as a pair of callables.

    Returns ``(on_points, on_vectors)``.  S^3 maps use both left and right
    quaternion multiplication; H^3 maps combine a rotation with a boost.
    """
    tag = SpaceTag(tag)
    if tag is SpaceTag.S3:
        p = rng.normal(size=4)
        q = rng.normal(size=4)
        p /= np.linalg.norm(p)
        q /= np.linalg.norm(q)

        def f(x):
            return quat_mul(quat_mul(p, x), q)

        return f, f
    if tag is SpaceTag.H3:
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] *= -1
        R = np.eye(4)
        R[1:, 1:] = Q
        v = rng.normal(size=3) * 0.5
        c = np.concatenate([[np.sqrt(1.0 + v @ v)], v])
        M = boost_to(c) @ R

        def g(x):
            return np.asarray(x, dtype=float) @ M.T

        return g, g
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    shift = rng.normal(size=3)
    return (lambda x: np.asarray(x, dtype=float) @ Q.T + shift), (lambda v: np.asarray(v, dtype=float) @ Q.T)


# ---------------------------------------------------------------------------
# typed layer


@dataclass(frozen=True, eq=False)
class Point:
    tag: SpaceTag
    coords: np.ndarray

    def __init__(self, tag, coords, tol: float = POINT_TOL):
        tag = SpaceTag(tag)
        coords = np.array(coords, dtype=float)
        if coords.shape != (tag.ambient_dim,):
            raise InvalidInput(f"{tag.value} points need {tag.ambient_dim} coordinates, got shape {coords.shape}")
        if tag is SpaceTag.S3 and abs(coords @ coords - 1.0) > tol:
            raise NotOnManifold(f"|x|^2 - 1 = {coords @ coords - 1.0:.3e}")
        if tag is SpaceTag.H3:
            q = float(minkowski_form(coords, coords))
            if abs(q - 1.0) > tol or coords[0] <= 0:
                raise NotOnManifold(f"<x,x> - 1 = {q - 1.0:.3e}, x0 = {coords[0]}")
        coords.setflags(write=False)
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "coords", coords)

    @property
    def geometry(self) -> Geometry:
        return geometry(self.tag)

    def __repr__(self):
        return f"Point({self.tag.value}, {self.coords.tolist()})"


@dataclass(frozen=True, eq=False)
class TangentVec:
    base: Point
    comps: np.ndarray

    def __init__(self, base: Point, comps, tol: float = TANGENT_TOL):
        comps = np.array(comps, dtype=float)
        if comps.shape != base.coords.shape:
            raise InvalidInput("tangent vector arity does not match its base point")
        if base.tag is not SpaceTag.R3:
            r = float(base.geometry.form(comps, base.coords))
            if abs(r) > tol * max(1.0, float(np.abs(comps).max())):
                raise NotOnManifold(f"vector is not tangent at base (residual {r:.3e})")
        comps.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "comps", comps)

    @property
    def tag(self) -> SpaceTag:
        return self.base.tag

    def norm(self) -> float:
        return float(geometry(self.tag).norm(self.comps))

    def dot(self, other: "TangentVec") -> float:
        _same_tag(self, other)
        return float(geometry(self.tag).inner(self.comps, other.comps))

    def __repr__(self):
        return f"TangentVec({self.comps.tolist()} at {self.base.coords.tolist()})"


def _same_tag(*objs):
    tags = {o.tag for o in objs}
    if len(tags) != 1:
        raise TagMismatch(f"mixed spaces: {sorted(t.value for t in tags)}")
    return tags.pop()


def distance(x: Point, y: Point) -> float:
    tag = _same_tag(x, y)
    if tag is SpaceTag.H3 and float(minkowski_form(x.coords, y.coords)) < 1.0 - INPUT_TOL:
        raise NotOnManifold("<x, y> < 1: not points of the same hyperboloid sheet")
    return float(geometry(tag).distance(x.coords, y.coords))


def geodesic_dir(x: Point, y: Point) -> TangentVec:
    tag = _same_tag(x, y)
    a = distance(x, y)
    if a < 1e-14:
        raise Singular("direction between coincident points")
    if tag is SpaceTag.S3 and np.pi - a < 1e-10:
        raise Singular("direction toward the antipode is undefined")
    g = geometry(tag)
    return TangentVec(x, g.project(x.coords, g.geodesic_dir(x.coords, y.coords)))


def grad_distance(x: Point, y: Point) -> TangentVec:
    """Gradient in y of ``distance(x, y)``."""
    return TangentVec(y, -geodesic_dir(y, x).comps)


def parallel_transport(x: Point, y: Point, v: TangentVec) -> TangentVec:
    tag = _same_tag(x, y, v)
    if tag is SpaceTag.S3 and np.pi - distance(x, y) < 1e-10:
        raise AmbiguousTransport("parallel transport between antipodal points is undefined")
    g = geometry(tag)
    return TangentVec(y, g.transport(x.coords, y.coords, v.comps))


def left_translate(x: Point, y: Point, v: TangentVec) -> TangentVec:
    """Differential of left multiplication by ``y x^-1`` (S^3 only)."""
    tag = _same_tag(x, y, v)
    if tag is not SpaceTag.S3:
        raise TagMismatch("left translation exists only on S^3")
    q = quat_mul(y.coords, quat_conj(x.coords))
    return TangentVec(y, quat_mul(q, v.comps))


def triple_product(a, b, c, tag=SpaceTag.S3) -> np.ndarray:
    """``[a, b, c]``; on H^3 the index-raised, sign-adjusted Minkowski version."""
    out = triple(a, b, c)
    if SpaceTag(tag) is SpaceTag.H3:
        out = -MINKOWSKI * out
    return out


def tangent_cross(x: Point, u: TangentVec, v: TangentVec) -> TangentVec:
    _same_tag(x, u, v)
    return TangentVec(x, geometry(x.tag).cross(x.coords, u.comps, v.comps))


def exp_map(x: Point, v: TangentVec, t: float) -> Point:
    tag = _same_tag(x, v)
    g = geometry(tag)
    if abs(v.norm() - 1.0) > 1e-10:
        raise InvalidInput("exp_map expects a unit tangent vector")
    y = g.exp(x.coords, v.comps, t)
    return Point(tag, g.reproject(y), tol=1e-9)
