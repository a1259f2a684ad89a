"""Biot-Savart and Green's operators, vector convolutions and Maxwell checks.

Volume integrals are weighted sums over a quadrature grid that is moved by a
fixed isometry so that its node pattern is centred on the evaluation point
``y`` (see :mod:`curvedlink.quadrature`).  The singular kernels then meet the
same node configuration at every ``y``; odd singular parts cancel by the
symmetry of that configuration, and the remaining quadrature error varies
smoothly with ``y``, which keeps finite differences in ``y`` meaningful.

Formats (with ``phi`` from :mod:`curvedlink.kernels`, signed):

parallel (S^3, H^3, R^3)
    ``BS(V)(y) = sum w P_yx V(x) x grad_y phi`` with the shifted kernel
    (Newton kernel on R^3).
left (S^3)
    ``B(V, phi_0) - A(V, 1) / (4 pi^2) + 2 G(V, phi_1)``.

Vector convolutions (S^3, left translation ``L V = y x^-1 V(x)``):
``A(V, phi) = sum w L V phi``, ``B(V, phi) = sum w L V x grad_y phi`` and
``G(V, phi) = grad_y sum w L V . grad_y phi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .errors import IncompatibleFormat, InvalidInput, TagMismatch
from .fields import FD_STEP, FieldSpec, ScalarSpec, divergence, eval_field, fd_curl, fd_divergence, fd_gradient, \
    fd_vector_laplacian
from .kernels import KERNELS, LAPLACE_KERNEL, SHIFT_KERNEL, Kernel, KernelId, get_kernel
from .linking import Format, resolve_format
from .quadrature import Grid, PolarGrid, S3Grid, check_tag
from .space import SpaceTag, geometry, move_origin_to, quat_conj, quat_mul, random_isometry

PI = np.pi


# ---------------------------------------------------------------------------
# grids


def volume_grid(spec_or_tag, scale: float = 1.0, radius: float | None = None, center=None) -> Grid:
    """Default grid for a field: the Hopf grid on S^3, a polar ball elsewhere.

    The ball is centred on the field's support and covers it.
    """
    if isinstance(spec_or_tag, FieldSpec):
        tag = spec_or_tag.tag
        radius = spec_or_tag.support_radius() if radius is None else radius
        center = spec_or_tag.center_point if center is None else center
    else:
        tag = SpaceTag(spec_or_tag)
    if tag is SpaceTag.S3 and radius is None:
        return S3Grid.build(int(round(32 * scale)), int(round(64 * scale)), 2 * int(round(32 * scale)))
    if radius is None:
        raise InvalidInput(f"fields on {tag.value} need compact support for volume integrals")
    return PolarGrid.build(tag, center, radius, int(round(24 * scale)), int(round(16 * scale)),
                           int(round(32 * scale)))


def _centered(grid: Grid, y) -> Grid:
    return grid.recenter(np.asarray(y, dtype=float))


def _node_data(grid, y, r_cut):
    g = geometry(grid.tag)
    X = grid.nodes
    Y = np.broadcast_to(np.asarray(y, dtype=float), X.shape)
    a = g.distance(X, Y)
    keep = a > r_cut
    return g, X, Y, a, keep


def _wsum(w, vals, keep):
    w = np.where(keep, w, 0.0)
    vals = np.where(keep[..., None] if vals.ndim > 1 else keep, vals, 0.0)
    return w @ vals


def _grad(k: Kernel, X, Y, a, keep):
    g = geometry(k.tag)
    a_safe = np.where(keep, a, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gf = k.grad_factor(a_safe)
    return gf[..., None] * (g.C(a_safe)[..., None] * Y - X)


def _safe_transport(g, X, Y, V):
    """Parallel transport to ``y``; zero where the S^3 pair is antipodal."""
    denom = 1.0 + g.form(X, Y)
    ok = denom > 1e-12
    coef = np.where(ok, g.form(V, Y) / np.where(ok, denom, 1.0), 0.0)
    out = V - coef[..., None] * (X + Y)
    return np.where(ok[..., None], out, 0.0)


def _left(y, X, V):
    return quat_mul(quat_mul(np.asarray(y, dtype=float), quat_conj(X)), V)


# ---------------------------------------------------------------------------
# kernels with scale factors (for A(V, Lap phi) style terms)


@dataclass(frozen=True)
class ScaledKernel:
    kernel: Kernel
    scale: float = 1.0


def _as_scaled(k) -> ScaledKernel:
    if isinstance(k, ScaledKernel):
        return k
    return ScaledKernel(get_kernel(k), 1.0)


# Laplacians of the smooth test kernels as multiples of kernels
_LAPLACIAN = {KernelId.S3_COS: (KernelId.S3_COS, -3.0)}


def kernel_laplacian(k) -> ScaledKernel:
    sk = _as_scaled(k)
    try:
        kid, c = _LAPLACIAN[sk.kernel.id]
    except KeyError:
        raise InvalidInput(f"no registered Laplacian for kernel {sk.kernel.id.value}") from None
    return ScaledKernel(KERNELS[kid], sk.scale * c)


# ---------------------------------------------------------------------------
# vector convolutions on S^3


def _require_s3(spec, grid):
    if spec.tag is not SpaceTag.S3:
        raise IncompatibleFormat("vector convolutions in left-translation format live on S^3")
    check_tag(grid, SpaceTag.S3)


def _points(y):
    y = np.asarray(y, dtype=float)
    return y.reshape(-1, y.shape[-1]), y.shape[:-1]


def conv_A(spec: FieldSpec, kernel, y, grid: Grid | None = None, r_cut: float = 0.0):
    """``sum w L_{yx^-1} V(x) phi(alpha)`` at each point of ``y``."""
    grid = volume_grid(spec) if grid is None else grid
    _require_s3(spec, grid)
    sk = _as_scaled(kernel)
    P, shape = _points(y)
    out = np.empty_like(P)
    for i, p in enumerate(P):
        G = _centered(grid, p)
        g, X, Y, a, keep = _node_data(G, p, r_cut)
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = sk.kernel.value(np.where(keep, a, 1.0))
        out[i] = sk.scale * _wsum(G.weights, _left(p, X, eval_field(spec, X)) * phi[:, None], keep)
    return out.reshape(shape + (P.shape[-1],))


def conv_B(spec: FieldSpec, kernel, y, grid: Grid | None = None, r_cut: float = 0.0):
    """``sum w L_{yx^-1} V(x) x grad_y phi``."""
    grid = volume_grid(spec) if grid is None else grid
    _require_s3(spec, grid)
    sk = _as_scaled(kernel)
    P, shape = _points(y)
    out = np.empty_like(P)
    for i, p in enumerate(P):
        G = _centered(grid, p)
        g, X, Y, a, keep = _node_data(G, p, r_cut)
        vals = g.cross(Y, _left(p, X, eval_field(spec, X)), _grad(sk.kernel, X, Y, a, keep))
        out[i] = sk.scale * _wsum(G.weights, vals, keep)
    return out.reshape(shape + (P.shape[-1],))


def conv_G_scalar(spec: FieldSpec, kernel, y, grid: Grid | None = None, r_cut: float = 0.0):
    """The scalar ``sum w L_{yx^-1} V(x) . grad_y phi`` whose gradient is ``G``."""
    grid = volume_grid(spec) if grid is None else grid
    _require_s3(spec, grid)
    sk = _as_scaled(kernel)
    P, shape = _points(y)
    out = np.empty(len(P))
    for i, p in enumerate(P):
        G = _centered(grid, p)
        g, X, Y, a, keep = _node_data(G, p, r_cut)
        vals = g.inner(_left(p, X, eval_field(spec, X)), _grad(sk.kernel, X, Y, a, keep))
        out[i] = sk.scale * _wsum(G.weights, vals, keep)
    return out.reshape(shape)


def conv_G(spec: FieldSpec, kernel, y, grid: Grid | None = None, r_cut: float = 0.0, h: float = FD_STEP,
           order: int = 2):
    """``grad_y`` of :func:`conv_G_scalar` by finite differences."""
    grid = volume_grid(spec) if grid is None else grid
    return fd_gradient(lambda P: conv_G_scalar(spec, kernel, P, grid, r_cut), SpaceTag.S3, y, h, order)


def greens_operator(spec: FieldSpec, y, grid: Grid | None = None, r_cut: float = 0.0, h: float = FD_STEP):
    """``A(V, phi_0) + 2 B(V, phi_1) + 4 G(V, phi_2)`` on S^3."""
    grid = volume_grid(spec) if grid is None else grid
    return (conv_A(spec, KernelId.S3_LAP, y, grid, r_cut)
            + 2 * conv_B(spec, KernelId.S3_PHI1, y, grid, r_cut)
            + 4 * conv_G(spec, KernelId.S3_PHI2, y, grid, r_cut, h))


@dataclass(frozen=True)
class ConvolutionResiduals:
    A: float
    B: float
    G: float
    scale: float


def convolution_laplacian_residuals(spec: FieldSpec, y, kernel=KernelId.S3_COS, grid: Grid | None = None,
                                    h: float = FD_STEP, h2: float = 2.5e-3) -> ConvolutionResiduals:
    """Residuals of the three Laplacian identities for the A, B and G convolutions.

    Left-hand sides use nested finite differences of the computed
    convolutions; right-hand sides use the registered kernel Laplacian.
    ``scale`` is the size of ``A(V, phi)`` at ``y`` for reference.
    """
    grid = volume_grid(spec, scale=0.5) if grid is None else grid
    y = np.asarray(y, dtype=float)
    k = _as_scaled(kernel)
    lk = kernel_laplacian(k)
    A = lambda p: conv_A(spec, k, p, grid)  # noqa: E731
    B = lambda p: conv_B(spec, k, p, grid)  # noqa: E731
    G = lambda p: conv_G(spec, k, p, grid, h=h)  # noqa: E731
    lap = lambda fn: fd_vector_laplacian(fn, SpaceTag.S3, y, h, h2)  # noqa: E731
    a_y, b_y, g_y = A(y), B(y), G(y)
    rA = lap(A) - (conv_A(spec, lk, y, grid) - 4 * a_y - 2 * b_y)
    rB = lap(B) - (conv_B(spec, lk, y, grid) + 2 * conv_A(spec, lk, y, grid) - 2 * g_y)
    rG = lap(G) - conv_G(spec, lk, y, grid, h=h)
    n = lambda v: float(np.linalg.norm(v))  # noqa: E731
    return ConvolutionResiduals(n(rA), n(rB), n(rG), n(a_y))


# ---------------------------------------------------------------------------
# Biot-Savart


@dataclass(frozen=True)
class BSResult:
    value: np.ndarray
    terms: dict = field(default_factory=dict)


def _bs_parallel(spec, p, grid, r_cut):
    G = _centered(grid, p)
    g, X, Y, a, keep = _node_data(G, p, r_cut)
    k = KERNELS[SHIFT_KERNEL[spec.tag]]
    PV = _safe_transport(g, X, Y, eval_field(spec, X)) if spec.tag is not SpaceTag.R3 else eval_field(spec, X)
    vals = g.cross(Y, PV, _grad(k, X, Y, a, keep))
    return _wsum(G.weights, vals, keep)


def biot_savart(spec: FieldSpec, y, fmt=None, grid: Grid | None = None, r_cut: float = 0.0,
                h: float = FD_STEP) -> BSResult:
    """Magnetic field of the current ``spec`` at the point ``y``.

    Left format returns the three integrals as ``terms`` ("first",
    "second", "third"); the third is the finite-difference gradient of its
    inner scalar integral.
    """
    fmt = resolve_format(spec.tag, fmt)
    if fmt is Format.EUCLIDEAN:
        fmt = Format.PARALLEL
    grid = volume_grid(spec) if grid is None else grid
    check_tag(grid, spec.tag)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise InvalidInput("biot_savart evaluates at one point; use biot_savart_many")
    if fmt is Format.PARALLEL:
        v = _bs_parallel(spec, y, grid, r_cut)
        return BSResult(v, {"first": v})
    first = conv_B(spec, KernelId.S3_LAP, y, grid, r_cut)
    G = _centered(grid, y)
    second = -(G.weights @ _left(y, G.nodes, eval_field(spec, G.nodes))) / (4 * PI**2)
    third = 2 * conv_G(spec, KernelId.S3_PHI1, y, grid, r_cut, h)
    return BSResult(first + second + third, {"first": first, "second": second, "third": third})


def biot_savart_many(spec: FieldSpec, Y, fmt=None, grid: Grid | None = None, r_cut: float = 0.0,
                     h: float = FD_STEP) -> np.ndarray:
    P, shape = _points(Y)
    out = np.stack([biot_savart(spec, p, fmt, grid, r_cut, h).value for p in P])
    return out.reshape(shape + (P.shape[-1],))


# ---------------------------------------------------------------------------
# curve currents


def bs_curve(curve, Y, fmt=None) -> np.ndarray:
    """Field at points ``Y`` of a unit current along a closed curve.

    The volume kernels are integrated against ``dx/ds ds``.  In left format
    the gradient term is omitted: it vanishes for the divergence-free
    currents carried by closed curves.
    """
    fmt = resolve_format(curve.tag, fmt)
    g = curve.geometry
    Y = np.asarray(Y, dtype=float)
    P, shape = _points(Y)
    X = curve.points[None, :, :]
    Xd = curve.velocity[None, :, :]
    Pb = np.broadcast_to(P[:, None, :], (len(P), curve.n, P.shape[-1]))
    Xb = np.broadcast_to(X, Pb.shape)
    a = g.distance(Xb, Pb)
    keep = a > 0
    ds = 2 * PI / curve.n
    if fmt is Format.LEFT:
        k = KERNELS[KernelId.S3_LAP]
        LV = quat_mul(quat_mul(Pb, quat_conj(Xb)), np.broadcast_to(Xd, Pb.shape))
        vals = g.cross(Pb, LV, _grad(k, Xb, Pb, a, keep)) - LV / (4 * PI**2)
    else:
        k = KERNELS[SHIFT_KERNEL[curve.tag]]
        Vd = np.broadcast_to(Xd, Pb.shape)
        PV = _safe_transport(g, Xb, Pb, Vd) if curve.tag is not SpaceTag.R3 else Vd
        vals = g.cross(Pb, PV, _grad(k, Xb, Pb, a, keep))
    vals = np.where(keep[..., None], vals, 0.0)
    return (vals.sum(axis=1) * ds).reshape(shape + (P.shape[-1],))


def circulation(k1, k2, fmt=None) -> float:
    """``sum_t B(y_t) . y'_t dt`` for the field ``B`` of the current on ``k1``."""
    if k1.tag is not k2.tag:
        raise TagMismatch("curves live on different spaces")
    B = bs_curve(k1, k2.points, fmt)
    g = k2.geometry
    return float(np.sum(g.inner(B, k2.velocity)) * 2 * PI / k2.n)


# ---------------------------------------------------------------------------
# key lemma


def key_lemma_residual(x, y, vx, kernel, h: float = FD_STEP, order: int = 4) -> float:
    """``|curl_y(P V x grad phi) - grad_y(V . grad_x(c phi)) - (Lap phi -+ phi)(V - <V,y> y)|``.

    ``c = cos`` on S^3 and ``cosh`` on H^3, where the right-hand side uses
    ``Lap phi - phi`` and ``Lap phi + phi`` respectively.
    """
    k = get_kernel(kernel)
    tag = k.tag
    if tag is SpaceTag.R3:
        raise IncompatibleFormat("the key lemma is stated on S^3 and H^3")
    g = geometry(tag)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    vx = np.asarray(vx, dtype=float)
    a = float(g.distance(x, y))
    if a < 0.2 or (tag is SpaceTag.S3 and a > PI - 0.2):
        raise InvalidInput(f"key lemma configuration at alpha = {a:.3f} is outside the safe range")
    sign = -1.0 if tag is SpaceTag.S3 else 1.0

    def F(P):
        Xb = np.broadcast_to(x, P.shape)
        aa = g.distance(Xb, P)
        keep = np.ones(aa.shape, dtype=bool)
        PV = _safe_transport(g, Xb, P, np.broadcast_to(vx, P.shape))
        return g.cross(P, PV, _grad(k, Xb, P, aa, keep))

    def f(P):
        Xb = np.broadcast_to(x, P.shape)
        aa = g.distance(Xb, P)
        # d/da (C phi) / S = -+ phi + C phi' / S
        dcphi = sign * k.value(aa) + g.C(aa) * k.grad_factor(aa)
        return -dcphi * g.inner(np.broadcast_to(vx, P.shape), P)

    lhs = fd_curl(F, tag, y, h, order) - fd_gradient(f, tag, y, h, order)
    rhs = (k.radial_laplacian(a) + sign * k.value(a)) * (vx - g.form(vx, y) * y)
    return float(g.norm(lhs - rhs))


def sample_points(spec: FieldSpec, n: int, rng, reach: float = 0.8) -> np.ndarray:
    """Random points on S^3, or inside ``reach`` times the support ball elsewhere."""
    tag = spec.tag
    g = geometry(tag)
    if tag is SpaceTag.S3:
        return g.reproject(rng.normal(size=(n, 4)))
    R = spec.support_radius()
    if R is None:
        raise InvalidInput("fields without compact support have no sampling ball")
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = reach * R * rng.uniform(size=n) ** (1 / 3)
    c = spec.center_point
    if tag is SpaceTag.R3:
        return c + r[:, None] * d
    local = np.concatenate([np.cosh(r)[:, None], np.sinh(r)[:, None] * d], axis=1)
    return g.reproject(move_origin_to(tag, c, local))


def key_lemma_sample(tag, rng, alpha_range=(0.3, 2.5)):
    """Random admissible configuration ``(x, y, vx)`` for :func:`key_lemma_residual`."""
    tag = SpaceTag(tag)
    g = geometry(tag)
    lo, hi = alpha_range
    if tag is SpaceTag.S3:
        hi = min(hi, PI - 0.3)
    on_points, _ = random_isometry(tag, rng)
    x = g.reproject(on_points(g.origin()))
    B = g.basis(x)
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    y = g.reproject(g.exp(x, d @ B, rng.uniform(lo, hi)))
    vx = rng.normal(size=3) @ B
    return x, y, vx


# ---------------------------------------------------------------------------
# electric fields and Maxwell


def _density_fn(rho):
    if isinstance(rho, ScalarSpec):
        return rho.value
    if callable(rho):
        return rho
    raise InvalidInput("charge density must be a ScalarSpec or a callable")


def check_charge(rho, grid: Grid, tol: float = 1e-8) -> float:
    """Grid average of an S^3 density; raises if it is not (numerically) zero."""
    avg = float(grid.weights @ _density_fn(rho)(grid.nodes) / grid.volume())
    if grid.tag is SpaceTag.S3 and abs(avg) > tol:
        raise InvalidInput(f"S^3 charge densities need average zero (got {avg:.2e})")
    return avg


def potential(rho, y, grid: Grid, r_cut: float = 0.0):
    """``sum w rho(x) phi(x, y)`` with the Laplace kernel of the space."""
    k = KERNELS[LAPLACE_KERNEL[grid.tag]]
    fn = _density_fn(rho)
    P, shape = _points(y)
    out = np.empty(len(P))
    for i, p in enumerate(P):
        G = _centered(grid, p)
        g, X, Y, a, keep = _node_data(G, p, r_cut)
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = k.value(np.where(keep, a, 1.0))
        out[i] = _wsum(G.weights, fn(X) * phi, keep)
    return out.reshape(shape)


def _direct_field(rho, y, grid: Grid, r_cut: float):
    k = KERNELS[LAPLACE_KERNEL[grid.tag]]
    fn = _density_fn(rho)
    P, shape = _points(y)
    out = np.empty(P.shape)
    for i, p in enumerate(P):
        G = _centered(grid, p)
        g, X, Y, a, keep = _node_data(G, p, r_cut)
        out[i] = _wsum(G.weights, fn(X)[:, None] * _grad(k, X, Y, a, keep), keep)
    return out.reshape(shape + (P.shape[-1],))


def electric_field(rho, y, grid: Grid, r_cut: float = 0.0, method: str = "auto", h: float = FD_STEP):
    """Gradient in ``y`` of :func:`potential`.

    ``"direct"`` integrates ``rho(x) grad_y phi``; ``"fd"`` differences the
    potential.  ``"auto"`` picks ``"fd"`` on Hopf grids, whose recentring is
    an isometry so the potential's quadrature error is smooth in ``y``, and
    ``"direct"`` on polar grids, where the radial weight cancels the kernel
    gradient's singularity.
    """
    if method == "auto":
        method = "fd" if isinstance(grid, S3Grid) else "direct"
    if method == "direct":
        return _direct_field(rho, y, grid, r_cut)
    if method != "fd":
        raise InvalidInput("method must be 'auto', 'direct' or 'fd'")
    P, shape = _points(y)
    out = np.stack([fd_gradient(lambda Q: potential(rho, Q, grid, r_cut), grid.tag, p, h, 2) for p in P])
    return out.reshape(shape + (P.shape[-1],))


@dataclass(frozen=True)
class MaxwellReport:
    div_e_minus_rho: float
    rho: float
    curl_e: float
    div_b: float
    ampere: float
    j_norm: float


def maxwell_residuals(J: FieldSpec, y, grid: Grid | None = None, rho=None, fmt=None,
                      h: float = FD_STEP) -> MaxwellReport:
    """Residuals of the four Maxwell equations at ``y``.

    ``B = BS(J)``; ``dE/dt`` is the field of the charge rate ``-div J``.  The
    Gauss-law and ``curl E`` checks use ``rho`` when given, else ``-div J``.
    """
    grid = volume_grid(J) if grid is None else grid
    tag = J.tag
    g = geometry(tag)
    y = np.asarray(y, dtype=float)
    Bf = lambda P: biot_savart_many(J, P, fmt, grid, h=h)  # noqa: E731
    curl_b = fd_curl(Bf, tag, y, h)
    div_b = float(fd_divergence(Bf, tag, y, h))
    rate = lambda X: -divergence(J, X)  # noqa: E731
    if J.is_divergence_free():
        dEdt = np.zeros_like(y)
    else:
        dEdt = electric_field(rate, y, grid)
    Jy = eval_field(J, y)
    ampere = float(g.norm(curl_b - Jy - dEdt))
    dens = _density_fn(rho) if rho is not None else rate
    Ef = lambda P: electric_field(dens, P, grid)  # noqa: E731
    div_e = float(fd_divergence(Ef, tag, y, 5e-3))
    curl_e = float(g.norm(fd_curl(Ef, tag, y, 5e-3)))
    r = float(dens(y[None])[0])
    return MaxwellReport(abs(div_e - r), r, curl_e, abs(div_b), ampere, float(g.norm(Jy)))
