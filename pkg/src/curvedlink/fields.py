"""Vector fields, scalar densities and first/second-order differential operators.

Fields are evaluated in ambient coordinates on arrays of points.  Finite
difference operators work in geodesic normal coordinates at the evaluation
point ``x``: the orthonormal frame ``E_a = basis(x)`` is pushed along the
geodesics ``exp_x(t E_a)``, samples are parallel transported back to ``x``
and differentiated componentwise.  In these coordinates the connection
vanishes at ``x``, so divergence and curl take their Euclidean form there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import InvalidInput, TagMismatch
from .space import Point, SpaceTag, TangentVec, boost_to, geometry, move_vectors_from_origin, quat_conj, quat_mul

PI = np.pi
FD_STEP = 1e-3
FD_STEP2 = 5e-3


# ---------------------------------------------------------------------------
# scalar functions


def _bump_profile(r, R):
    t = np.clip(1.0 - (r / R) ** 2, 0.0, None)
    return t**3


def _bump_dprofile_over_r(r, R):
    # b'(r) / r, finite at r = 0
    t = np.clip(1.0 - (r / R) ** 2, 0.0, None)
    return -6.0 / R**2 * t**2


def _to_origin(tag, c, pts):
    """Inverse of :func:`move_origin_to` for the same centre."""
    tag = SpaceTag(tag)
    pts = np.asarray(pts, dtype=float)
    if tag is SpaceTag.S3:
        return quat_mul(quat_conj(np.asarray(c, dtype=float)), pts)
    if tag is SpaceTag.H3:
        c = np.asarray(c, dtype=float)
        inv = np.concatenate([[c[0]], -c[1:]])
        return pts @ boost_to(inv).T
    return pts - np.asarray(c, dtype=float)


def _radial_gradient(g, c, x, dprof_over_r, r):
    # b'(r) grad r = (b'(r) / r) (r / S(r)) (C(r) x - c)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(r > 1e-12, r / np.where(r > 1e-12, g.S(r), 1.0), 1.0)
    return (dprof_over_r * ratio)[..., None] * (g.C(r)[..., None] * x - c)


@dataclass(frozen=True)
class ScalarSpec:
    """Registry scalar function.

    ``kind``:
      * ``"coord"`` (S^3): ``f(x) = x_k``; zero average, ``Lap f = -3 f``;
      * ``"coord_product"`` (S^3): ``f(x) = x_k x_l`` (``k != l``); zero
        average, ``Lap f = -8 f``;
      * ``"bump"``: ``(1 - (r/R)^2)^3`` for ``r = dist(center, x) < R``;
      * ``"constant"``.
    """

    tag: SpaceTag
    kind: str
    index: tuple = (0,)
    center: tuple | None = None
    radius: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tag", SpaceTag(self.tag))
        if self.kind in ("coord", "coord_product") and self.tag is not SpaceTag.S3:
            raise InvalidInput(f"scalar {self.kind!r} is defined on S^3 only")
        if self.kind == "coord_product" and len(set(self.index)) != 2:
            raise InvalidInput("coord_product needs two distinct indices")
        if self.kind not in ("coord", "coord_product", "bump", "constant"):
            raise InvalidInput(f"unknown scalar kind {self.kind!r}")

    @property
    def center_point(self) -> np.ndarray:
        g = geometry(self.tag)
        return g.origin() if self.center is None else np.asarray(self.center, dtype=float)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "coord":
            return self.scale * x[..., self.index[0]]
        if self.kind == "coord_product":
            k, l = self.index
            return self.scale * x[..., k] * x[..., l]
        if self.kind == "constant":
            return np.full(x.shape[:-1], float(self.scale))
        g = geometry(self.tag)
        r = g.distance(self.center_point, x)
        return self.scale * _bump_profile(r, self.radius)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = geometry(self.tag)
        if self.kind == "coord":
            e = np.zeros(4)
            e[self.index[0]] = 1.0
            return self.scale * g.project(x, np.broadcast_to(e, x.shape))
        if self.kind == "coord_product":
            k, l = self.index
            w = np.zeros_like(x)
            w[..., k] = x[..., l]
            w[..., l] = x[..., k]
            return self.scale * g.project(x, w)
        if self.kind == "constant":
            return np.zeros_like(x)
        c = self.center_point
        r = g.distance(c, x)
        return self.scale * _radial_gradient(g, c, x, _bump_dprofile_over_r(r, self.radius), r)

    def laplacian(self, x):
        """Closed form where registered, else ``None``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "coord":
            return -3.0 * self.value(x)
        if self.kind == "coord_product":
            return -8.0 * self.value(x)
        if self.kind == "constant":
            return np.zeros(x.shape[:-1])
        return None

    def support_radius(self) -> float | None:
        return self.radius if self.kind == "bump" else None


# ---------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True, eq=False)
class SampledData:
    """Frame components of a field on a regular coordinate grid.

    S^3 grids use Hopf coordinates ``(u = sin^2 eta, a, b)`` with the
    left-invariant frame; R^3 and H^3 grids use the cube ``[-h, h]^3`` of
    normal coordinates at the origin with the radially transported
    coordinate frame.
    """

    tag: SpaceTag
    axes: tuple
    comps: np.ndarray
    half_width: float = 0.0
    interp: object = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """Registry vector field.

    ``kind``:
      * ``"left_invariant"`` (S^3): ``x (a i + b j + c k)``;
      * ``"right_invariant"`` (S^3): ``(a i + b j + c k) x``;
      * ``"gradient"``: gradient of ``scalar``;
      * ``"bump_rotational"``: rotation Killing field about ``center`` (axis
        ``abc``) times the bump profile; divergence free, supported in the
        ball of radius ``radius``;
      * ``"bump_gradient"``: gradient of the bump scalar;
      * ``"polynomial"`` (S^3): ``x -> P_x(M x + (c . x) N x)`` for 4x4
        matrices ``M, N`` and a vector ``c``; smooth and generic (neither
        divergence free nor a gradient in general);
      * ``"grid_sampled"``: interpolated from ``sampled``;
      * ``"zero"``.
    """

    tag: SpaceTag
    kind: str
    abc: tuple = (1.0, 0.0, 0.0)
    matrix: tuple | None = None
    quad: tuple | None = None
    scalar: ScalarSpec | None = None
    center: tuple | None = None
    radius: float = 1.0
    sampled: SampledData | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", SpaceTag(self.tag))
        if self.kind in ("left_invariant", "right_invariant", "polynomial") and self.tag is not SpaceTag.S3:
            raise InvalidInput(f"{self.kind} fields exist only on S^3")
        if self.kind == "gradient" and (self.scalar is None or self.scalar.tag is not self.tag):
            raise InvalidInput("gradient field needs a scalar on the same space")
        if self.kind == "grid_sampled" and (self.sampled is None or self.sampled.tag is not self.tag):
            raise InvalidInput("grid_sampled field needs sampled data on the same space")
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown field kind {self.kind!r}")
        if self.kind == "polynomial" and (self.matrix is None or len(self.matrix) != 16
                                          or self.quad is None or len(self.quad) != 20):
            raise InvalidInput("polynomial field needs M (16 entries) and c, N (4 + 16 entries)")

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.abc))

    @property
    def center_point(self) -> np.ndarray:
        g = geometry(self.tag)
        return g.origin() if self.center is None else np.asarray(self.center, dtype=float)

    def support_radius(self) -> float | None:
        if self.kind in ("bump_rotational", "bump_gradient"):
            return self.radius
        if self.kind == "gradient":
            return self.scalar.support_radius()
        if self.kind == "grid_sampled" and self.tag is not SpaceTag.S3:
            return float(np.sqrt(3.0) * self.sampled.half_width)
        return None

    def is_divergence_free(self) -> bool | None:
        if self.kind in ("left_invariant", "right_invariant", "bump_rotational", "zero"):
            return True
        if self.kind in ("gradient", "bump_gradient"):
            return False
        return None


KINDS = ("left_invariant", "right_invariant", "gradient", "bump_rotational", "bump_gradient", "polynomial",
         "grid_sampled", "zero")


def left_invariant(a=1.0, b=0.0, c=0.0) -> FieldSpec:
    return FieldSpec(SpaceTag.S3, "left_invariant", (float(a), float(b), float(c)))


def right_invariant(a=1.0, b=0.0, c=0.0) -> FieldSpec:
    return FieldSpec(SpaceTag.S3, "right_invariant", (float(a), float(b), float(c)))


def polynomial_field(M, c=(0.0, 0.0, 0.0, 0.0), N=None) -> FieldSpec:
    M = np.asarray(M, dtype=float).reshape(4, 4)
    N = np.zeros((4, 4)) if N is None else np.asarray(N, dtype=float).reshape(4, 4)
    quad = tuple(np.concatenate([np.asarray(c, dtype=float).ravel(), N.ravel()]).tolist())
    return FieldSpec(SpaceTag.S3, "polynomial", matrix=tuple(M.ravel().tolist()), quad=quad)


def random_smooth_field(rng) -> FieldSpec:
    """Random polynomial field with mixed parity."""
    return polynomial_field(rng.normal(size=(4, 4)), rng.normal(size=4), rng.normal(size=(4, 4)))


def gradient_field(scalar: ScalarSpec) -> FieldSpec:
    return FieldSpec(scalar.tag, "gradient", scalar=scalar)


def bump_field(tag, variant: str = "rotational", center=None, radius: float = 1.0, axis=(0.0, 0.0, 1.0)) -> FieldSpec:
    if variant not in ("rotational", "gradient"):
        raise InvalidInput("bump variant must be 'rotational' or 'gradient'")
    c = None if center is None else tuple(float(v) for v in center)
    return FieldSpec(SpaceTag(tag), "bump_" + variant, tuple(float(v) for v in axis), center=c, radius=float(radius))


def _imag(abc):
    return np.concatenate([[0.0], np.asarray(abc, dtype=float)])


def _killing_at_origin(tag, x, axis):
    # rotation about the origin with angular velocity ``axis``
    if tag is SpaceTag.R3:
        return np.cross(axis, x)
    out = np.zeros_like(x)
    out[..., 1:] = np.cross(axis, x[..., 1:])
    return out


def eval_field(spec: FieldSpec, x) -> np.ndarray:
    """Ambient components of the field at points ``x`` (shape ``(..., d)``)."""
    x = np.asarray(x, dtype=float)
    g = geometry(spec.tag)
    if x.shape[-1] != g.dim:
        raise TagMismatch(f"points of dimension {x.shape[-1]} given to a field on {spec.tag.value}")
    k = spec.kind
    if k == "zero":
        return np.zeros_like(x)
    if k == "left_invariant":
        return quat_mul(x, _imag(spec.abc))
    if k == "right_invariant":
        return quat_mul(_imag(spec.abc), x)
    if k == "gradient":
        return spec.scalar.gradient(x)
    if k == "polynomial":
        M = np.asarray(spec.matrix).reshape(4, 4)
        c = np.asarray(spec.quad[:4])
        N = np.asarray(spec.quad[4:]).reshape(4, 4)
        return g.project(x, x @ M.T + (x @ c)[..., None] * (x @ N.T))
    if k == "bump_gradient":
        return ScalarSpec(spec.tag, "bump", center=spec.center, radius=spec.radius).gradient(x)
    if k == "bump_rotational":
        c = spec.center_point
        x0 = _to_origin(spec.tag, c, x)
        r = g.distance(g.origin(), x0)
        v0 = _bump_profile(r, spec.radius)[..., None] * _killing_at_origin(spec.tag, x0, np.asarray(spec.abc))
        if spec.tag is SpaceTag.R3:
            return v0
        return move_vectors_from_origin(spec.tag, c, v0)
    return _eval_sampled(spec.sampled, x)


def field_at(spec: FieldSpec, x: Point) -> TangentVec:
    if x.tag is not spec.tag:
        raise TagMismatch(f"point on {x.tag.value}, field on {spec.tag.value}")
    return TangentVec(x, eval_field(spec, x.coords), tol=1e-9)


# ---------------------------------------------------------------------------
# grid-sampled fields


def _hopf_coords(x):
    u = np.clip(x[..., 2] ** 2 + x[..., 3] ** 2, 0.0, 1.0)
    a = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * PI)
    b = np.mod(np.arctan2(x[..., 3], x[..., 2]), 2 * PI)
    return np.stack([u, a, b], axis=-1)


def _hopf_points(u, a, b):
    ce, se = np.sqrt(1.0 - u), np.sqrt(u)
    return np.stack([ce * np.cos(a), ce * np.sin(a), se * np.cos(b), se * np.sin(b)], axis=-1)


def _log_origin(tag, x):
    g = geometry(tag)
    if tag is SpaceTag.R3:
        return x
    r = g.distance(g.origin(), x)
    s = np.linalg.norm(x[..., 1:], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(s > 1e-15, r / np.where(s > 1e-15, s, 1.0), 1.0)
    return f[..., None] * x[..., 1:]


def _exp_origin(tag, w):
    g = geometry(tag)
    if tag is SpaceTag.R3:
        return w
    r = np.linalg.norm(w, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(r[..., None] > 0, w / np.where(r > 0, r, 1.0)[..., None], 0.0)
    dirs = np.concatenate([np.zeros(w.shape[:-1] + (1,)), u], axis=-1)
    return g.exp(g.origin(), dirs, r)


def sample_field(source: FieldSpec | Callable, tag, shape=(16, 32, 32), half_width: float = 2.0) -> FieldSpec:
    """Sample a field on a regular grid and return a ``grid_sampled`` spec."""
    tag = SpaceTag(tag)
    g = geometry(tag)
    fn = (lambda p: eval_field(source, p)) if isinstance(source, FieldSpec) else source
    if tag is SpaceTag.S3:
        n_u, n_a, n_b = shape
        axes = (np.linspace(0.0, 1.0, n_u), 2 * PI * np.arange(n_a + 1) / n_a, 2 * PI * np.arange(n_b + 1) / n_b)
        U, A, B = np.meshgrid(*axes, indexing="ij")
        pts = _hopf_points(U, A, B)
        hw = 0.0
    else:
        axes = tuple(np.linspace(-half_width, half_width, m) for m in shape)
        W = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        pts = g.reproject(_exp_origin(tag, W)) if tag is not SpaceTag.R3 else W
        hw = float(half_width)
    V = fn(pts.reshape(-1, g.dim)).reshape(pts.shape)
    E = g.basis(pts)
    comps = g.inner(E, V[..., None, :])
    interp = RegularGridInterpolator(axes, comps, method="linear", bounds_error=False, fill_value=None)
    data = SampledData(tag, axes, comps, hw, interp)
    return FieldSpec(tag, "grid_sampled", sampled=data)


def _eval_sampled(data: SampledData, x):
    g = geometry(data.tag)
    if data.tag is SpaceTag.S3:
        q = _hopf_coords(x)
    else:
        q = _log_origin(data.tag, x)
        if np.any(np.abs(q) > data.half_width * (1 + 1e-12)):
            raise InvalidInput("point outside the sampled field's grid")
    comps = data.interp(q.reshape(-1, 3)).reshape(q.shape)
    E = g.basis(x)
    return np.einsum("...a,...ad->...d", comps, E)


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class FrameAtPoint:
    base: np.ndarray
    vectors: np.ndarray  # (3, d)


def frame_at(tag, x) -> FrameAtPoint:
    """Positively oriented orthonormal frame (S^3: ``x i, x j, x k``)."""
    g = geometry(tag)
    x = np.asarray(x, dtype=float)
    return FrameAtPoint(x, g.basis(x))


# ---------------------------------------------------------------------------
# finite-difference operators in geodesic normal coordinates


def _stencil(tag, x, h, order):
    """Points ``exp_x(t E_a)`` for ``t in offsets``; returns (pts, E, offsets)."""
    g = geometry(tag)
    x = np.asarray(x, dtype=float)
    E = g.basis(x)  # (..., 3, d)
    offs = np.array([-h, h]) if order == 2 else np.array([-2 * h, -h, h, 2 * h])
    xe = x[..., None, None, :]
    pts = g.exp(xe, E[..., :, None, :], np.broadcast_to(offs, E.shape[:-1][:-1] + (3, len(offs))))
    return g.reproject(pts), E, offs


def _weights(order, h):
    if order == 2:
        return np.array([-0.5, 0.5]) / h
    if order == 4:
        return np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)
    raise InvalidInput("finite-difference order must be 2 or 4")


def _components_at(tag, x, pts, vals, E):
    """Transport ``vals`` at ``pts`` back to ``x`` and take frame components."""
    g = geometry(tag)
    xb = np.broadcast_to(x[..., None, None, :], pts.shape)
    back = g.transport(pts, xb, vals)
    return g.inner(back[..., None, :], E[..., None, None, :, :])  # (..., 3 dirs, k, 3 comps)


def fd_jacobian(fn: Callable, tag, x, h: float = FD_STEP, order: int = 2) -> np.ndarray:
    """``J[..., a, b] = d_a V^b`` at ``x`` in normal coordinates."""
    tag = SpaceTag(tag)
    x = np.asarray(x, dtype=float)
    pts, E, offs = _stencil(tag, x, h, order)
    vals = np.asarray(fn(pts.reshape(-1, pts.shape[-1]))).reshape(pts.shape)
    comps = _components_at(tag, x, pts, vals, E)
    return np.einsum("k,...akb->...ab", _weights(order, h), comps)


def fd_divergence(fn: Callable, tag, x, h: float = FD_STEP, order: int = 2):
    J = fd_jacobian(fn, tag, x, h, order)
    return np.trace(J, axis1=-2, axis2=-1)


def fd_curl(fn: Callable, tag, x, h: float = FD_STEP, order: int = 2):
    J = fd_jacobian(fn, tag, x, h, order)
    c = np.stack([J[..., 1, 2] - J[..., 2, 1], J[..., 2, 0] - J[..., 0, 2], J[..., 0, 1] - J[..., 1, 0]], axis=-1)
    E = geometry(tag).basis(np.asarray(x, dtype=float))
    return np.einsum("...a,...ad->...d", c, E)


def fd_gradient(fn: Callable, tag, x, h: float = FD_STEP, order: int = 2):
    """Gradient of a scalar function ``fn(points) -> values``."""
    tag = SpaceTag(tag)
    x = np.asarray(x, dtype=float)
    pts, E, offs = _stencil(tag, x, h, order)
    vals = np.asarray(fn(pts.reshape(-1, pts.shape[-1]))).reshape(pts.shape[:-1])
    d = np.einsum("k,...ak->...a", _weights(order, h), vals)
    return np.einsum("...a,...ad->...d", d, E)


def fd_scalar_laplacian(fn: Callable, tag, x, h: float = FD_STEP2):
    """Sum of second derivatives along the three normal-coordinate axes."""
    tag = SpaceTag(tag)
    x = np.asarray(x, dtype=float)
    pts, E, offs = _stencil(tag, x, h, 4)
    vals = np.asarray(fn(pts.reshape(-1, pts.shape[-1]))).reshape(pts.shape[:-1])
    f0 = np.asarray(fn(x.reshape(-1, x.shape[-1]))).reshape(x.shape[:-1])
    w = np.array([-1.0, 16.0, 16.0, -1.0]) / (12.0 * h * h)
    return np.einsum("k,...ak->...", w, vals) - 3 * 30.0 / (12.0 * h * h) * f0


def fd_vector_laplacian(fn: Callable, tag, x, h: float = FD_STEP, h2: float = FD_STEP2, order: int = 2):
    """``-curl curl V + grad div V`` by nested finite differences."""
    curl_fn = lambda p: fd_curl(fn, tag, p, h, order)  # noqa: E731
    div_fn = lambda p: fd_divergence(fn, tag, p, h, order)  # noqa: E731
    return -fd_curl(curl_fn, tag, x, h2, order) + fd_gradient(div_fn, tag, x, h2, order)


# ---------------------------------------------------------------------------
# operators on registry fields


def _analytic(spec: FieldSpec, op: str, x):
    k = spec.kind
    if k == "zero":
        return np.zeros(np.shape(x)[:-1]) if op == "div" else np.zeros_like(np.asarray(x, dtype=float))
    if k in ("left_invariant", "right_invariant"):
        V = eval_field(spec, x)
        lam = -2.0 if k == "left_invariant" else 2.0
        if op == "div":
            return np.zeros(np.shape(x)[:-1])
        if op == "curl":
            return lam * V
        return -lam * lam * V
    if k == "gradient" and spec.scalar.laplacian(np.asarray(x, dtype=float)) is not None:
        x = np.asarray(x, dtype=float)
        if op == "div":
            return spec.scalar.laplacian(x)
        if op == "curl":
            return np.zeros_like(x)
        # grad(div grad f) = grad(Lap f) = mu grad f for the registered eigenfunctions
        mu = {"coord": -3.0, "coord_product": -8.0, "constant": 0.0}[spec.scalar.kind]
        return mu * eval_field(spec, x)
    return None


def _dispatch(spec, op, x, method, fd):
    if method not in ("auto", "analytic", "fd"):
        raise InvalidInput("method must be 'auto', 'analytic' or 'fd'")
    if method != "fd":
        out = _analytic(spec, op, x)
        if out is not None:
            return out
        if method == "analytic":
            raise InvalidInput(f"no closed form for {op} of a {spec.kind} field")
    return fd()


def divergence(spec: FieldSpec, x, method: str = "auto", h: float = FD_STEP, order: int = 2):
    fn = lambda p: eval_field(spec, p)  # noqa: E731
    return _dispatch(spec, "div", x, method, lambda: fd_divergence(fn, spec.tag, x, h, order))


def curl(spec: FieldSpec, x, method: str = "auto", h: float = FD_STEP, order: int = 2):
    fn = lambda p: eval_field(spec, p)  # noqa: E731
    return _dispatch(spec, "curl", x, method, lambda: fd_curl(fn, spec.tag, x, h, order))


def vector_laplacian(spec: FieldSpec, x, method: str = "auto", h: float = FD_STEP, h2: float = FD_STEP2,
                     order: int = 2):
    fn = lambda p: eval_field(spec, p)  # noqa: E731
    return _dispatch(spec, "vlap", x, method, lambda: fd_vector_laplacian(fn, spec.tag, x, h, h2, order))


# ---------------------------------------------------------------------------
# L^2 pairing


def l2_inner(a: FieldSpec, b: FieldSpec, grid) -> float:
    if a.tag is not b.tag or grid.tag is not a.tag:
        raise TagMismatch("fields and grid must share a space")
    g = geometry(a.tag)
    vals = g.inner(eval_field(a, grid.nodes), eval_field(b, grid.nodes))
    return float(np.sum(grid.weights * vals))


def l2_norm(spec: FieldSpec, grid) -> float:
    return float(np.sqrt(max(l2_inner(spec, spec, grid), 0.0)))


# ---------------------------------------------------------------------------
# registry lookup by name (CLI and field files)


_FIELD_PARAMS = {
    "left_invariant": {"a", "b", "c"}, "right_invariant": {"a", "b", "c"}, "zero": set(),
    "polynomial": {"m", "c", "n"}, "random_smooth": {"seed"},
    "bump_rotational": {"radius", "ax", "ay", "az"}, "bump_gradient": {"radius", "ax", "ay", "az"},
    "grad_coord": {"index"}, "grad_coord_product": {"index"}, "grad_bump": {"radius"},
}
_SCALAR_PARAMS = {"coord": {"index", "scale"}, "coord_product": {"index", "scale"}, "bump": {"radius", "scale"},
                  "constant": {"scale"}}


def _check_params(kind, name, params, table):
    if name not in table:
        raise InvalidInput(f"unknown {kind} {name!r}")
    extra = set(params) - table[name]
    if extra:
        raise InvalidInput(f"{kind} {name!r} takes no parameter(s) {sorted(extra)}; known: {sorted(table[name])}")


def _registry_tag(tag, params):
    """Space from the ``space`` parameter of a registry reference, checked against ``tag``."""
    space = params.pop("space", None)
    if space is None:
        return tag
    try:
        space = SpaceTag(space)
    except ValueError:
        raise InvalidInput(f"unknown space {space!r}") from None
    if tag is not None and SpaceTag(tag) is not space:
        raise TagMismatch(f"reference asks for {space.value} but {SpaceTag(tag).value} was requested")
    return space


def field_from_name(name: str, tag=None, **params) -> FieldSpec:
    """Build a field from a registry name and string/float parameters."""
    tag = _registry_tag(tag, params)
    _check_params("field", name, params, _FIELD_PARAMS)
    f = lambda key, default: float(params.get(key, default))  # noqa: E731
    abc = (f("a", 1.0), f("b", 0.0), f("c", 0.0))
    if name == "left_invariant":
        return left_invariant(*abc)
    if name == "right_invariant":
        return right_invariant(*abc)
    if name == "zero":
        return FieldSpec(SpaceTag(tag or "s3"), "zero")
    if name == "polynomial":
        vec = lambda key, m: [float(v) for v in str(params.get(key, ",".join(["0"] * m))).split(",")]  # noqa: E731
        return polynomial_field(vec("m", 16), vec("c", 4), vec("n", 16))
    if name == "random_smooth":
        return random_smooth_field(np.random.default_rng(int(params.get("seed", 0))))
    if name in ("bump_rotational", "bump_gradient"):
        return bump_field(tag or "r3", name.split("_")[1], radius=f("radius", 1.0),
                          axis=(f("ax", 0.0), f("ay", 0.0), f("az", 1.0)))
    if name in ("grad_coord", "grad_coord_product"):
        kind = name[5:]
        idx = tuple(int(i) for i in str(params.get("index", "0" if kind == "coord" else "0,1")).split(","))
        return gradient_field(ScalarSpec(SpaceTag.S3, kind, idx))
    if name == "grad_bump":
        return gradient_field(ScalarSpec(SpaceTag(tag or "r3"), "bump", radius=f("radius", 1.0)))
    raise InvalidInput(f"unknown field {name!r}")


def scalar_from_name(name: str, tag=None, **params) -> ScalarSpec:
    tag = _registry_tag(tag, params)
    _check_params("density", name, params, _SCALAR_PARAMS)
    if name in ("coord", "coord_product"):
        idx = tuple(int(i) for i in str(params.get("index", "0" if name == "coord" else "0,1")).split(","))
        return ScalarSpec(SpaceTag.S3, name, idx, scale=float(params.get("scale", 1.0)))
    if name == "bump":
        return ScalarSpec(SpaceTag(tag or "r3"), "bump", radius=float(params.get("radius", 1.0)),
                          scale=float(params.get("scale", 1.0)))
    if name == "constant":
        return ScalarSpec(SpaceTag(tag or "s3"), "constant", scale=float(params.get("scale", 1.0)))
    raise InvalidInput(f"unknown scalar {name!r}")
