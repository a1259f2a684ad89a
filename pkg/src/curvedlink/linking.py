"""Linking, writhing and twisting integrals.

Integrands, written with the signed kernels of :mod:`curvedlink.kernels`
(``g = phi'(alpha) / S(alpha)``) and ``det`` the 4x4 determinant:

parallel format (S^3 and H^3)
    ``-g(alpha) det(x, y, x', y')``.  Parallel transport drops out because
    ``P_yx x' - x'`` lies in ``span(x, y)``.
left format (S^3)
    first integrand ``g0(alpha) (u x w) . Im(conj(y) x)`` with
    ``u = conj(x) x'`` and ``w = conj(y) y'``; second integrand
    ``-(u . w) / (4 pi^2)``.
Euclidean format (R^3)
    ``-g(alpha) det(x', y', y - x)`` (the Gauss integrand).

All double sums use the periodic trapezoid rule in both parameters.

With these conventions the left-format writhe satisfies
``Wr_L = Wr_P - L / (2 pi)`` and twists satisfy ``Tw_L = Tw_P - L / (2 pi)``,
so ``Lk = Tw_P + Wr_P = Tw_L + Wr_L + L / pi`` for a ribbon.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .curves import (ClosedCurve, Framing, check_simple, make_framing, min_distance, resample, ribbon_edge,
                     spectral_resample)
from .errors import CurvesTooClose, IncompatibleFormat, InvalidInput, NumericalFailure, TagMismatch
from .space import SpaceTag, quat_conj, quat_mul

PI = np.pi
# curves closer than this many node spacings trigger refinement of the inner curve
DISJOINT_FACTOR = 10.0
MAX_REFINE = 64


class Format(str, enum.Enum):
    LEFT = "left"
    PARALLEL = "parallel"
    EUCLIDEAN = "euclidean"


_MODES = {
    (SpaceTag.S3, Format.PARALLEL): _backend.MODE_S3_PARALLEL,
    (SpaceTag.H3, Format.PARALLEL): _backend.MODE_H3_PARALLEL,
    (SpaceTag.S3, Format.LEFT): _backend.MODE_S3_LEFT,
    (SpaceTag.R3, Format.EUCLIDEAN): _backend.MODE_R3,
}

DEFAULT_FORMAT = {SpaceTag.S3: Format.PARALLEL, SpaceTag.H3: Format.PARALLEL, SpaceTag.R3: Format.EUCLIDEAN}


def resolve_format(tag, fmt) -> Format:
    tag = SpaceTag(tag)
    fmt = DEFAULT_FORMAT[tag] if fmt is None else Format(fmt)
    if (tag, fmt) not in _MODES:
        raise IncompatibleFormat(f"format {fmt.value!r} is not available on {tag.value}")
    return fmt


def _mode(tag, fmt):
    return _MODES[(SpaceTag(tag), resolve_format(tag, fmt))]


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise NumericalFailure("non-finite value in a curve double sum")


@dataclass(frozen=True)
class LinkResult:
    value: float
    first: float
    second: float
    integer_gap: float
    error_estimate: float
    n_outer: int
    n_inner: int
    min_distance: float

    def __float__(self):
        return self.value


def linking_number(k1: ClosedCurve, k2: ClosedCurve, fmt=None, n: int | None = None, refine: bool = True,
                   workers: int | None = None) -> LinkResult:
    """Double integral over ``k1 x k2`` of the linking integrand of ``fmt``.

    If the curves come closer than ``DISJOINT_FACTOR`` node spacings, the
    inner curve ``k2`` is spectrally resampled until its spacing is a tenth
    of the minimum distance (at most ``MAX_REFINE`` times); otherwise
    :class:`CurvesTooClose` is raised.  The error estimate compares with the
    sum over every other outer node.
    """
    if k1.tag is not k2.tag:
        raise TagMismatch(f"curves live on {k1.tag.value} and {k2.tag.value}")
    mode = _mode(k1.tag, fmt)
    if n is not None:
        k1, k2 = resample(k1, n), resample(k2, n)
    d = min_distance(k1, k2)
    h = max(k1.max_spacing(), k2.max_spacing())
    if d <= 0:
        raise CurvesTooClose("the curves intersect")
    if d < DISJOINT_FACTOR * h:
        if not refine:
            raise CurvesTooClose(f"curves {d:.3e} apart with node spacing {h:.3e}")
        factor = math.ceil(DISJOINT_FACTOR * k2.max_spacing() / d)
        if factor > MAX_REFINE:
            raise CurvesTooClose(f"curves {d:.3e} apart need more than {MAX_REFINE}x refinement")
        k2 = resample(k2, k2.n * factor)
    first, second = _backend.link_rows(mode, k1.points, k1.velocity, k2.points, k2.velocity, workers=workers)
    _check_finite(first, second)
    w = (2 * PI / k1.n) * (2 * PI / k2.n)
    f = _backend.fsum_rows(first) * w
    s = _backend.fsum_rows(second) * w
    value = f + s
    err = float("nan")
    if k1.n % 2 == 0:
        half = 2 * w * (_backend.fsum_rows(first[::2]) + _backend.fsum_rows(second[::2]))
        err = abs(half - value)
    return LinkResult(value, f, s, abs(value - round(value)), err, k1.n, k2.n, d)


@dataclass(frozen=True)
class WritheResult:
    value: float
    first: float
    second: float
    error_estimate: float
    n: int


def _writhe_sums(curve, mode, workers):
    first, second = _backend.link_rows(mode, curve.points, curve.velocity, curve.points, curve.velocity,
                                       diag=True, workers=workers)
    _check_finite(first, second)
    w = (2 * PI / curve.n) ** 2
    return _backend.fsum_rows(first) * w, _backend.fsum_rows(second) * w


def writhe(curve: ClosedCurve, fmt=None, n: int | None = None, extrapolate: bool = True,
           check: bool = True, workers: int | None = None) -> WritheResult:
    """Writhing integral of a simple closed curve.

    Diagonal pairs get integrand 0 (the limit value).  The integrand has a
    ``|s - t|`` kink along the diagonal, which makes the trapezoid error
    ``O(h^2)`` with an even expansion; with ``extrapolate`` the sum over
    every other node is combined with the full sum to cancel the ``h^2``
    term.  The second left-format integrand is smooth and is not
    extrapolated.
    """
    mode = _mode(curve.tag, fmt)
    if n is not None:
        curve = resample(curve, n)
    if check:
        check_simple(curve)
    f, s = _writhe_sums(curve, mode, workers)
    err = float("nan")
    if curve.n % 2 == 0 and curve.n >= 16:
        sub = ClosedCurve(curve.tag, curve.points[::2], curve.velocity[::2], curve.name)
        f2, _ = _writhe_sums(sub, mode, workers)
        corr = (f - f2) / 3.0
        if extrapolate:
            f = f + corr
        err = abs(corr)
    return WritheResult(f + s, f, s, err, curve.n)


# ---------------------------------------------------------------------------
# twist


class Flavor(str, enum.Enum):
    LEFT = "left"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class TwistResult:
    value: float
    flavor: str
    method: str


def _move_to(curve, flavor, src_idx, dst_idx, V):
    g = curve.geometry
    X = curve.points
    if flavor is Flavor.LEFT:
        q = quat_mul(X[dst_idx], quat_conj(X[src_idx]))
        return quat_mul(q, V)
    return g.transport(X[src_idx], X[dst_idx], V)


def covariant_derivative_fd(framing: Framing, flavor="parallel", order: int = 2) -> np.ndarray:
    """``V'(s_k)`` by central differences of neighbours moved to ``x(s_k)``."""
    flavor = Flavor(flavor)
    c = framing.curve
    n = c.n
    V = framing.normals
    idx = np.arange(n)
    ds = 2 * PI / n

    def diff(step):
        fwd = _move_to(c, flavor, (idx + step) % n, idx, V[(idx + step) % n])
        bwd = _move_to(c, flavor, (idx - step) % n, idx, V[(idx - step) % n])
        return (fwd - bwd) / (2 * step * ds)

    d1 = diff(1)
    if order == 2:
        out = d1
    elif order == 4:
        out = (4 * d1 - diff(2)) / 3
    else:
        raise InvalidInput("finite-difference order must be 2 or 4")
    return c.geometry.project(c.points, out)


def covariant_derivative_exact(framing: Framing, flavor="parallel") -> np.ndarray:
    """Derivative from the registered ambient ``dV/ds``."""
    flavor = Flavor(flavor)
    c = framing.curve
    if framing.derivative is None:
        raise InvalidInput("framing has no registered derivative")
    dV = framing.derivative
    if flavor is Flavor.LEFT:
        # d/dh of x(s) x(s+h)^-1 V(s+h) at h = 0
        return dV - quat_mul(quat_mul(c.velocity, quat_conj(c.points)), framing.normals)
    return c.geometry.project(c.points, dV)


def twist(framing: Framing, flavor="parallel", order: int = 2, exact: bool | None = None) -> TwistResult:
    """``(1/2 pi) sum (T x V) . V' ds`` with ``T`` the unit tangent.

    ``exact=None`` uses the registered derivative when the framing has one.
    """
    flavor = Flavor(flavor)
    c = framing.curve
    if flavor is Flavor.LEFT and c.tag is not SpaceTag.S3:
        raise IncompatibleFormat("the left-invariant twist exists only on S^3")
    use_exact = framing.derivative is not None if exact is None else exact
    if use_exact:
        dV = covariant_derivative_exact(framing, flavor)
        method = "exact"
    else:
        dV = covariant_derivative_fd(framing, flavor, order)
        method = f"fd{order}"
    g = c.geometry
    T = c.unit_tangent()
    integrand = g.inner(g.cross(c.points, T, framing.normals), dV)
    _check_finite(integrand)
    return TwistResult(float(math.fsum(integrand.tolist()) / c.n), flavor.value, method)


# ---------------------------------------------------------------------------
# link = twist + writhe


@dataclass(frozen=True)
class LtwReport:
    lk: float
    tw: float
    wr: float
    residual: float
    integer_gap: float
    length: float
    eps: float
    fmt: str
    n: int
    lk_error: float
    wr_error: float


def resample_framing(framing: Framing, n: int) -> Framing:
    if framing.curve.n == n:
        return framing
    curve = resample(framing.curve, n)
    V = spectral_resample(np.asarray(framing.normals), n)
    return make_framing(curve, "explicit", normals=V)


def ltw_check(framing: Framing, eps: float = 1e-2, fmt=None, n: int | None = None, order: int = 2,
              workers: int | None = None) -> LtwReport:
    """Compare ``Lk(K, K_eps)`` with ``Tw + Wr`` in one format."""
    c = framing.curve
    fmt = resolve_format(c.tag, fmt)
    if fmt is Format.EUCLIDEAN:
        flavor = Flavor.PARALLEL
    else:
        flavor = Flavor(fmt.value)
    if n is not None:
        framing = resample_framing(framing, n)
        c = framing.curve
    edge = ribbon_edge(framing, eps)
    lk = linking_number(c, edge, fmt, workers=workers)
    tw = twist(framing, flavor, order=order)
    wr = writhe(c, fmt, workers=workers)
    res = lk.value - tw.value - wr.value
    return LtwReport(lk.value, tw.value, wr.value, res, lk.integer_gap, c.length, float(eps), fmt.value, c.n,
                     lk.error_estimate, wr.error_estimate)
