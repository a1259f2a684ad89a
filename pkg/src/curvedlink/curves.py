"""Closed curves sampled on a uniform parameter grid, framings and ribbons.

A curve is stored by its node coordinates ``x(s_k)`` for ``s_k = 2 pi k / n``
together with parameter velocities ``dx/ds``.  Velocities of canonical
curves are analytic; otherwise they come from FFT differentiation of the
ambient coordinates followed by projection onto the tangent space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInput, NotOnManifold, SelfIntersectionSuspected
from .space import INPUT_TOL, Point, SpaceTag, TangentVec, geometry, move_origin_to, move_vectors_from_origin, quat_mul

PI = np.pi
MIN_NODES = 8


def _params(n):
    return 2 * PI * np.arange(n) / n


def spectral_derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
    """d^order/ds^order of periodic samples on ``[0, 2 pi)`` along axis 0."""
    n = values.shape[0]
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0 and order % 2 == 1:
        k[n // 2] = 0.0  # the Nyquist mode has no odd derivative
    f = np.fft.fft(values, axis=0)
    mult = (1j * k) ** order
    return np.real(np.fft.ifft(f * mult.reshape((-1,) + (1,) * (values.ndim - 1)), axis=0))


def spectral_resample(values: np.ndarray, m: int) -> np.ndarray:
    """Trigonometric interpolation of periodic samples onto ``m`` nodes."""
    n = values.shape[0]
    if m == n:
        return values.copy()
    F = np.fft.fft(values, axis=0) / n
    G = np.zeros((m,) + values.shape[1:], dtype=complex)
    k = min(n, m)
    half = (k - 1) // 2
    G[: half + 1] = F[: half + 1]
    if half:
        G[-half:] = F[-half:]
    if k % 2 == 0:
        if m > n:
            # split the Nyquist mode of the source evenly between +-n/2
            G[k // 2] = 0.5 * F[k // 2]
            G[-(k // 2)] = 0.5 * F[k // 2]
        else:
            G[k // 2] = F[k // 2] + F[-(k // 2)]
    return np.real(np.fft.ifft(G, axis=0)) * m


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    tag: SpaceTag
    points: np.ndarray
    velocity: np.ndarray
    name: str = "curve"

    def __post_init__(self):
        tag = SpaceTag(self.tag)
        object.__setattr__(self, "tag", tag)
        pts = np.ascontiguousarray(self.points, dtype=float)
        vel = np.ascontiguousarray(self.velocity, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != tag.ambient_dim:
            raise InvalidInput(f"{tag.value} curves need (n, {tag.ambient_dim}) coordinates")
        if pts.shape[0] < MIN_NODES:
            raise InvalidInput(f"curves need at least {MIN_NODES} nodes")
        if vel.shape != pts.shape:
            raise InvalidInput("velocity array does not match the nodes")
        g = geometry(tag)
        res = np.abs(g.membership(pts)).max()
        if res > 1e-10:
            raise NotOnManifold(f"curve node off the manifold (residual {res:.2e})")
        if np.any(g.distance(pts, np.roll(pts, -1, axis=0)) == 0.0):
            raise InvalidInput("consecutive curve nodes coincide")
        pts.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "velocity", vel)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def geometry(self):
        return geometry(self.tag)

    @property
    def speed(self) -> np.ndarray:
        return self.geometry.norm(self.velocity)

    @property
    def length(self) -> float:
        return float(np.sum(self.speed) * 2 * PI / self.n)

    def unit_tangent(self) -> np.ndarray:
        return self.velocity / self.speed[:, None]

    def max_spacing(self) -> float:
        return float(self.geometry.distance(self.points, np.roll(self.points, -1, axis=0)).max())

    def point(self, i: int) -> Point:
        return Point(self.tag, self.points[i], tol=INPUT_TOL)

    def velocity_at(self, i: int) -> TangentVec:
        return TangentVec(self.point(i), self.velocity[i])

    def reversed(self) -> "ClosedCurve":
        idx = (-np.arange(self.n)) % self.n
        return ClosedCurve(self.tag, self.points[idx], -self.velocity[idx], self.name + "_rev")

    def mapped(self, on_points: Callable, on_vectors: Callable) -> "ClosedCurve":
        """Image under an isometry given by its action on points and vectors."""
        g = self.geometry
        return ClosedCurve(self.tag, g.reproject(on_points(self.points)), on_vectors(self.velocity), self.name)


def curve_from_points(tag, points, name: str = "curve") -> ClosedCurve:
    """Curve through the given nodes with spectrally differentiated velocity."""
    tag = SpaceTag(tag)
    g = geometry(tag)
    pts = g.reproject(np.asarray(points, dtype=float))
    vel = g.project(pts, spectral_derivative(pts))
    return ClosedCurve(tag, pts, vel, name)


def velocity(curve: ClosedCurve, i: int) -> TangentVec:
    return curve.velocity_at(i)


def resample(curve: ClosedCurve, n: int) -> ClosedCurve:
    """Trigonometric interpolation to ``n`` nodes, then reprojection."""
    if n < MIN_NODES:
        raise InvalidInput(f"curves need at least {MIN_NODES} nodes")
    if n == curve.n:
        return curve
    g = curve.geometry
    raw = spectral_resample(np.asarray(curve.points), n)
    off = np.abs(g.membership(raw)).max()
    if off > 1e-2:
        raise NotOnManifold(f"resampled nodes drift {off:.2e} off the manifold; use more source nodes")
    pts = g.reproject(raw)
    vel = g.project(pts, spectral_resample(np.asarray(curve.velocity), n))
    return ClosedCurve(curve.tag, pts, vel, curve.name)


def min_distance(k1: ClosedCurve, k2: ClosedCurve, block: int = 1024) -> float:
    g = k1.geometry
    best = np.inf
    for s in range(0, k1.n, block):
        d = g.distance(k1.points[s:s + block, None, :], k2.points[None, :, :])
        best = min(best, float(d.min()))
    return best


def check_simple(curve: ClosedCurve, neighbours: int = 3, threshold: float = 0.5) -> float:
    """Heuristic embeddedness test.

    Returns the smallest distance between nodes more than ``neighbours``
    steps apart, in units of the largest node spacing, and raises
    :class:`SelfIntersectionSuspected` below ``threshold``.  This cannot
    certify embeddedness between nodes.
    """
    g = curve.geometry
    n = curve.n
    h = curve.max_spacing()
    worst = np.inf
    idx = np.arange(n)
    for s in range(0, n, 512):
        d = g.distance(curve.points[s:s + 512, None, :], curve.points[None, :, :])
        gap = np.abs(idx[s:s + 512, None] - idx[None, :])
        gap = np.minimum(gap, n - gap)
        far = gap > neighbours
        if np.any(far):
            worst = min(worst, float(d[far].min() / h))
    if worst < threshold:
        raise SelfIntersectionSuspected(f"non-adjacent nodes nearly coincide ({worst:.3f} node spacings)")
    return worst


# ---------------------------------------------------------------------------
# canonical curves


def _tagged(tag, pts, vel, name):
    return ClosedCurve(SpaceTag(tag), pts, vel, name)


def great_circle(n: int = 128, a=None, b=None) -> ClosedCurve:
    """``cos(s) a + sin(s) b`` for orthonormal ``a, b`` in R^4 (default e0, e1)."""
    a = np.array([1.0, 0, 0, 0]) if a is None else np.asarray(a, dtype=float)
    b = np.array([0, 1.0, 0, 0]) if b is None else np.asarray(b, dtype=float)
    if abs(a @ b) > 1e-12 or abs(a @ a - 1) > 1e-12 or abs(b @ b - 1) > 1e-12:
        raise InvalidInput("great circle needs an orthonormal pair")
    s = _params(n)[:, None]
    return _tagged("s3", np.cos(s) * a + np.sin(s) * b, -np.sin(s) * a + np.cos(s) * b, "great_circle")


def orthogonal_great_circle_pair(n: int = 128):
    """The circles in the (e0, e1) and (e2, e3) planes."""
    e = np.eye(4)
    return great_circle(n, e[0], e[1]), great_circle(n, e[2], e[3])


def clifford_torus_knot(p: int = 2, q: int = 3, n: int = 256) -> ClosedCurve:
    p, q = int(p), int(q)
    if p == 0 or q == 0 or math.gcd(p, q) != 1:
        raise InvalidInput(f"({p}, {q}) does not define a torus knot: need gcd(p, q) = 1")
    s = _params(n)
    r = 1 / np.sqrt(2)
    pts = r * np.stack([np.cos(p * s), np.sin(p * s), np.cos(q * s), np.sin(q * s)], axis=-1)
    vel = r * np.stack([-p * np.sin(p * s), p * np.cos(p * s), -q * np.sin(q * s), q * np.cos(q * s)], axis=-1)
    return _tagged("s3", pts, vel, f"clifford_torus_knot_{p}_{q}")


def hopf_fiber(q, n: int = 128) -> ClosedCurve:
    """The fibre ``s -> exp(i s) q``: orbit of the right-invariant field ``i x``."""
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q)
    s = _params(n)
    e = np.stack([np.cos(s), np.sin(s), 0 * s, 0 * s], axis=-1)
    de = np.stack([-np.sin(s), np.cos(s), 0 * s, 0 * s], axis=-1)
    return _tagged("s3", quat_mul(e, q), quat_mul(de, q), "hopf_fiber")


def hopf_fiber_pair(n: int = 256, a: float = PI / 4):
    """Fibres through ``1`` and ``cos(a) + sin(a) j``; a Hopf link for 0 < a < pi."""
    return hopf_fiber([1.0, 0, 0, 0], n), hopf_fiber([np.cos(a), 0, np.sin(a), 0], n)


def h3_geodesic_circle(n: int = 128, center=None, radius: float = 1.0, plane=(0, 1)) -> ClosedCurve:
    """Points at hyperbolic distance ``radius`` from ``center`` in a frame plane."""
    g = geometry("h3")
    center = g.origin() if center is None else np.asarray(center, dtype=float)
    s = _params(n)[:, None]
    e = np.zeros((2, 3))
    e[0, plane[0]] = e[1, plane[1]] = 1.0
    u = np.cos(s) * e[0] + np.sin(s) * e[1]
    du = -np.sin(s) * e[0] + np.cos(s) * e[1]
    pts0 = np.concatenate([np.full((n, 1), np.cosh(radius)), np.sinh(radius) * u], axis=1)
    vel0 = np.concatenate([np.zeros((n, 1)), np.sinh(radius) * du], axis=1)
    pts = move_origin_to("h3", center, pts0)
    vel = move_vectors_from_origin("h3", center, vel0)
    return _tagged("h3", g.reproject(pts), vel, "h3_geodesic_circle")


def r3_round_circle(n: int = 128, center=(0.0, 0.0, 0.0), radius: float = 1.0, normal=(0.0, 0.0, 1.0)):
    c = np.asarray(center, dtype=float)
    nrm = np.asarray(normal, dtype=float)
    nrm = nrm / np.linalg.norm(nrm)
    a = np.cross(nrm, [1.0, 0, 0])
    if np.linalg.norm(a) < 1e-8:
        a = np.cross(nrm, [0, 1.0, 0])
    a /= np.linalg.norm(a)
    b = np.cross(nrm, a)
    s = _params(n)[:, None]
    return _tagged("r3", c + radius * (np.cos(s) * a + np.sin(s) * b),
                   radius * (-np.sin(s) * a + np.cos(s) * b), "r3_round_circle")


# model curves in R^3 (used directly and through exp_embedded)
def _model_circle(s, center=(0, 0, 0), axes=((1, 0, 0), (0, 1, 0))):
    c = np.asarray(center, dtype=float)
    a, b = (np.asarray(v, dtype=float) for v in axes)
    return c + np.cos(s)[:, None] * a + np.sin(s)[:, None] * b, -np.sin(s)[:, None] * a + np.cos(s)[:, None] * b


def r3_hopf_link(n: int = 256):
    """Positively linked unit circles: xy-plane about 0, xz-plane about (1, 0, 0)."""
    s = _params(n)
    p1, v1 = _model_circle(s)
    p2, v2 = _model_circle(s, (1, 0, 0), ((1, 0, 0), (0, 0, -1)))
    return _tagged("r3", p1, v1, "r3_hopf_a"), _tagged("r3", p2, v2, "r3_hopf_b")


def r3_torus_knot(p: int = 2, q: int = 3, n: int = 256, R: float = 2.0, r: float = 1.0) -> ClosedCurve:
    if math.gcd(int(p), int(q)) != 1:
        raise InvalidInput("torus knot needs gcd(p, q) = 1")
    s = _params(n)
    rho = R + r * np.cos(q * s)
    pts = np.stack([rho * np.cos(p * s), rho * np.sin(p * s), r * np.sin(q * s)], axis=-1)
    drho = -r * q * np.sin(q * s)
    vel = np.stack([drho * np.cos(p * s) - p * rho * np.sin(p * s),
                    drho * np.sin(p * s) + p * rho * np.cos(p * s),
                    r * q * np.cos(q * s)], axis=-1)
    return _tagged("r3", pts, vel, f"r3_torus_knot_{p}_{q}")


def exp_embedded(model: ClosedCurve, tag, base=None, scale: float = 1.0) -> ClosedCurve:
    """Push an R^3 model curve into ``tag`` through the exponential map.

    The model is scaled by ``scale``, read in the tangent space at ``base``
    (frame ``basis(base)``) and mapped by ``exp_base``.  Velocities are
    differentiated spectrally.
    """
    tag = SpaceTag(tag)
    if model.tag is not SpaceTag.R3:
        raise InvalidInput("exp_embedded takes an R^3 model curve")
    if tag is SpaceTag.R3:
        base = np.zeros(3) if base is None else np.asarray(base, dtype=float)
        return ClosedCurve(tag, base + scale * model.points, scale * model.velocity, model.name + "_emb")
    g = geometry(tag)
    base = g.origin() if base is None else np.asarray(base, dtype=float)
    w = scale * np.asarray(model.points)
    r = np.linalg.norm(w, axis=-1)
    if tag is SpaceTag.S3 and r.max() >= PI:
        raise InvalidInput("model curve leaves the injectivity ball of S^3")
    E = g.basis(base)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(r[:, None] > 0, w / np.where(r > 0, r, 1.0)[:, None], 0.0)
    dirs = u @ E
    pts = g.reproject(g.exp(base, dirs, r))
    return curve_from_points(tag, pts, model.name + "_emb")


def exp_hopf_link(tag, n: int = 512, scale: float = 0.5, base=None):
    a, b = r3_hopf_link(n)
    return exp_embedded(a, tag, base, scale), exp_embedded(b, tag, base, scale)


CANONICAL = {
    "great_circle": lambda n=128: great_circle(int(n)),
    "orthogonal_great_circle_pair": lambda n=128: orthogonal_great_circle_pair(int(n)),
    "orthogonal_a": lambda n=128: orthogonal_great_circle_pair(int(n))[0],
    "orthogonal_b": lambda n=128: orthogonal_great_circle_pair(int(n))[1],
    "clifford_torus_knot": lambda n=256, p=2, q=3: clifford_torus_knot(int(p), int(q), int(n)),
    "hopf_fiber_pair": lambda n=256, a=PI / 4: hopf_fiber_pair(int(n), float(a)),
    "hopf_a": lambda n=256, a=PI / 4: hopf_fiber_pair(int(n), float(a))[0],
    "hopf_b": lambda n=256, a=PI / 4: hopf_fiber_pair(int(n), float(a))[1],
    "h3_geodesic_circle": lambda n=128, radius=1.0: h3_geodesic_circle(int(n), radius=float(radius)),
    "r3_round_circle": lambda n=128, radius=1.0, cx=0.0, cy=0.0, cz=0.0: r3_round_circle(
        int(n), (float(cx), float(cy), float(cz)), float(radius)),
    "r3_hopf_a": lambda n=256: r3_hopf_link(int(n))[0],
    "r3_hopf_b": lambda n=256: r3_hopf_link(int(n))[1],
    "r3_torus_knot": lambda n=256, p=2, q=3: r3_torus_knot(int(p), int(q), int(n)),
    "exp_hopf_a": lambda n=512, space="h3", scale=0.5: exp_hopf_link(space, int(n), float(scale))[0],
    "exp_hopf_b": lambda n=512, space="h3", scale=0.5: exp_hopf_link(space, int(n), float(scale))[1],
    "exp_torus_knot": lambda n=512, space="h3", scale=0.2, p=2, q=3: exp_embedded(
        r3_torus_knot(int(p), int(q), int(n)), space, None, float(scale)),
}


def canonical_curve(name: str, **params):
    try:
        factory = CANONICAL[name]
    except KeyError:
        raise InvalidInput(f"unknown canonical curve {name!r}; known: {sorted(CANONICAL)}") from None
    try:
        return factory(**params)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"bad parameters for {name}: {exc}") from None


# ---------------------------------------------------------------------------
# framings and ribbons


@dataclass(frozen=True, eq=False)
class Framing:
    """Unit normal field along a curve.

    ``derivative`` optionally holds the exact ambient derivative ``dV/ds``;
    twists then use it instead of finite differences.  ``holonomy`` records
    the closing angle removed by :func:`make_framing` ("parallel_corrected").
    """

    curve: ClosedCurve
    normals: np.ndarray
    name: str = "framing"
    derivative: np.ndarray | None = None
    holonomy: float | None = None

    def __post_init__(self):
        V = np.ascontiguousarray(self.normals, dtype=float)
        c = self.curve
        if V.shape != c.points.shape:
            raise InvalidInput("framing needs one normal per curve node")
        g = c.geometry
        if c.tag is not SpaceTag.R3:
            tang = np.abs(g.form(V, c.points)).max()
            if tang > 1e-8:
                raise NotOnManifold(f"framing vectors are not tangent (residual {tang:.2e})")
        unit = np.abs(g.norm(V) - 1.0).max()
        normal = np.abs(g.inner(V, c.unit_tangent())).max()
        if unit > 1e-8 or normal > 1e-8:
            raise InvalidInput(f"framing is not unit normal (|V|-1: {unit:.2e}, V.T: {normal:.2e})")
        V.setflags(write=False)
        object.__setattr__(self, "normals", V)


def _orthonormalize(curve: ClosedCurve, V: np.ndarray) -> np.ndarray:
    g = curve.geometry
    T = curve.unit_tangent()
    V = g.project(curve.points, V)
    V = V - g.inner(V, T)[:, None] * T
    return V / g.norm(V)[:, None]


def rotate_framing(framing: Framing, angle) -> Framing:
    """Rotate each normal about the tangent by ``angle[k]`` (radians)."""
    c = framing.curve
    g = c.geometry
    angle = np.broadcast_to(np.asarray(angle, dtype=float), (c.n,))
    T = c.unit_tangent()
    V = framing.normals
    W = g.cross(c.points, T, V)
    out = np.cos(angle)[:, None] * V + np.sin(angle)[:, None] * W
    return Framing(c, _orthonormalize(c, out), framing.name + "_rot")


def _initial_normal(curve: ClosedCurve) -> np.ndarray:
    g = curve.geometry
    T = curve.unit_tangent()[0]
    x = curve.points[0]
    for cand in g.basis(x):
        v = cand - g.inner(cand, T) * T
        if g.norm(v) > 0.3:
            return v / g.norm(v)
    raise InvalidInput("no initial normal could be chosen")


def parallel_framing(curve: ClosedCurve):
    """Normal field transported node to node along chords; returns (V, holonomy).

    Each step transports along the geodesic chord, removes the tangential
    part and renormalises.  The holonomy is the angle from ``V_0`` to the
    transported ``V_n`` measured positively toward ``T_0 x V_0``.
    """
    g = curve.geometry
    T = curve.unit_tangent()
    X = curve.points
    n = curve.n
    V = np.empty_like(X)
    V[0] = _initial_normal(curve)
    v = V[0]
    for k in range(1, n + 1):
        kk = k % n
        v = g.transport(X[k - 1], X[kk], v)
        v = g.project(X[kk], v)
        v = v - g.inner(v, T[kk]) * T[kk]
        v = v / g.norm(v)
        if k < n:
            V[k] = v
    W0 = g.cross(X[0], T[0], V[0])
    theta = float(np.arctan2(g.inner(v, W0), g.inner(v, V[0])))
    return V, theta


def make_framing(curve: ClosedCurve, method: str = "parallel_corrected", theta0: float = 0.0,
                 normals=None) -> Framing:
    """Build a framing.

    ``method``:
      * ``"right_j"`` - ``V = x j`` along a curve through the (e0, e1)
        plane (exact for the great circle; derivative registered);
      * ``"parallel"`` - transported without closing correction (may not close);
      * ``"parallel_corrected"`` - transported, then unrolled by ``-theta s / 2 pi``;
      * ``"constant_angle"`` - ``parallel_corrected`` rotated by ``theta0``;
      * ``"explicit"`` - the given ``normals``.
    """
    n = curve.n
    if method == "right_j":
        if curve.tag is not SpaceTag.S3:
            raise InvalidInput("right_j framing lives on S^3")
        j = np.array([0, 0, 1.0, 0])
        V = quat_mul(curve.points, j)
        dV = quat_mul(curve.velocity, j)
        return Framing(curve, _orthonormalize(curve, V), "right_j", derivative=dV)
    if method == "explicit":
        if normals is None:
            raise InvalidInput("explicit framing needs normals")
        return Framing(curve, _orthonormalize(curve, np.asarray(normals, dtype=float)), "explicit")
    if method in ("parallel", "parallel_corrected", "constant_angle"):
        V, theta = parallel_framing(curve)
        if method == "parallel":
            return Framing(curve, V, "parallel", holonomy=theta)
        fr = Framing(curve, V, "parallel", holonomy=theta)
        unroll = -theta * np.arange(n) / n
        if method == "constant_angle":
            unroll = unroll + theta0
        out = rotate_framing(fr, unroll)
        return Framing(curve, out.normals, method, holonomy=theta)
    raise InvalidInput(f"unknown framing method {method!r}")


@dataclass(frozen=True, eq=False)
class Ribbon:
    framing: Framing
    eps: float


def ribbon_edge(framing: Framing, eps: float, check: bool = True) -> ClosedCurve:
    """The curve ``exp_{x(s)}(eps V(s))``."""
    c = framing.curve
    if eps < 0:
        raise InvalidInput("ribbon width must be non-negative")
    if eps == 0:
        return c
    g = c.geometry
    pts = g.reproject(g.exp(c.points, framing.normals, np.full(c.n, float(eps))))
    edge = curve_from_points(c.tag, pts, c.name + "_edge")
    if check:
        d = min_distance(c, edge)
        if d <= eps / 2:
            raise SelfIntersectionSuspected(f"ribbon edge comes within {d:.3e} of the curve (eps = {eps})")
    return edge
