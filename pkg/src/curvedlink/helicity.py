"""Helicity of vector fields and Biot-Savart norm bounds.

Two routes to the helicity ``H(V) = <BS(V), V>``:

``double_integral``
    one pair sum over ``grid x grid`` of the helicity integrand of the
    format, pairs closer than ``r_cut`` excluded.  The same sum on the grid
    at half resolution gives the reported error estimate.
``bs_pairing``
    an outer grid sum of ``BS(V)(y) . V(y)`` with ``BS`` evaluated by
    :func:`curvedlink.electro.biot_savart` on its own recentred grid.  The
    error estimate adds the change from dropping every other outer node to
    the change from evaluating ``BS`` one inner grid level coarser.

Bounds on a ball of radius ``R``: ``N(R) = R`` on R^3,
``(2 (1 - cos R) + (pi - R) sin R) / pi`` on S^3 and ``sinh R`` on H^3.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _backend
from .electro import biot_savart_many, volume_grid
from .errors import InvalidInput, NumericalFailure
from .fields import FieldSpec, curl, divergence, eval_field, l2_norm
from .linking import Format, _mode, resolve_format
from .quadrature import Grid, PairGrid, PolarGrid, S3Grid, check_tag
from .space import SpaceTag, geometry

PI = np.pi
VOLUME_S3 = 2 * PI**2


class Route(str, enum.Enum):
    DOUBLE_INTEGRAL = "double_integral"
    BS_PAIRING = "bs_pairing"


@dataclass(frozen=True)
class HelicityResult:
    value: float
    route: str
    fmt: str
    error_estimate: float
    n_nodes: int


def _coarser(grid: Grid) -> Grid:
    if isinstance(grid, S3Grid):
        n_u, n_a, n_b = grid.shape
        return S3Grid.build(max(2, n_u // 2), max(2, n_a // 2), max(2, 2 * (n_b // 4)))
    if isinstance(grid, PolarGrid):
        return PolarGrid.build(grid.tag, grid.center, grid.radius, *[max(2, s // 2) for s in grid.shape])
    raise InvalidInput("no coarser version of this grid")


def _pair_sum(spec: FieldSpec, fmt: Format, grid: Grid, r_cut: float | None, workers) -> float:
    pairs = PairGrid.build(grid, r_cut)
    X = grid.nodes
    V = eval_field(spec, X)
    w = grid.weights
    mode = _mode(spec.tag, fmt)
    div = divergence(spec, X) if fmt is Format.LEFT and not spec.is_divergence_free() else None
    rows = _backend.helicity_rows(mode, X, V, w, pairs.r_cut, div, workers=workers)
    if not np.all(np.isfinite(rows)):
        raise NumericalFailure("non-finite value in the helicity pair sum")
    return _backend.fsum_rows(rows.sum(axis=1), w)


def helicity(spec: FieldSpec, fmt=None, grid: Grid | None = None, route="bs_pairing", r_cut: float | None = None,
             inner_grid: Grid | None = None, workers: int | None = None) -> HelicityResult:
    """Helicity of ``spec`` by one of the two routes.

    ``grid`` is the pair grid (double integral) or the outer grid (pairing);
    the pairing route evaluates ``BS`` on ``inner_grid``.  Defaults:
    Hopf grid at 1/4 resolution for the pair sum, 1/8 resolution outside and
    1/2 resolution inside for the pairing.
    """
    route = Route(route)
    fmt = resolve_format(spec.tag, fmt)
    if spec.tag is not SpaceTag.S3 and spec.support_radius() is None:
        raise InvalidInput("helicity on R^3 and H^3 needs a compactly supported field")
    if route is Route.DOUBLE_INTEGRAL:
        grid = volume_grid(spec, scale=0.25) if grid is None else grid
        check_tag(grid, spec.tag)
        value = _pair_sum(spec, fmt, grid, r_cut, workers)
        coarse = _pair_sum(spec, fmt, _coarser(grid), None if r_cut is None else 2 * r_cut, workers)
        return HelicityResult(value, route.value, fmt.value, abs(value - coarse), grid.size)
    outer = volume_grid(spec, scale=0.125) if grid is None else grid
    inner = volume_grid(spec, scale=0.5) if inner_grid is None else inner_grid
    check_tag(outer, spec.tag)
    value, half_outer = _pairing(spec, fmt, outer, inner)
    coarse_inner, _ = _pairing(spec, fmt, outer, _coarser(inner))
    err = abs(value - half_outer) + abs(value - coarse_inner)
    return HelicityResult(value, route.value, fmt.value, err, outer.size)


def _pairing(spec, fmt, outer, inner):
    g = geometry(spec.tag)
    V = eval_field(spec, outer.nodes)
    live = np.linalg.norm(V, axis=-1) > 0
    B = np.zeros_like(V)
    if np.any(live):
        B[live] = biot_savart_many(spec, outer.nodes[live], fmt, inner)
    vals = outer.weights * g.inner(B, V)
    value = math.fsum(vals.tolist())
    half_outer = math.fsum(vals[::2].tolist()) * 2.0
    return value, half_outer


def bs_norm_ratio(spec: FieldSpec, fmt=None, outer: Grid | None = None, inner: Grid | None = None) -> float:
    """``|BS(V)| / |V|`` in L^2, both norms on the outer grid."""
    fmt = resolve_format(spec.tag, fmt)
    outer = volume_grid(spec, scale=0.125) if outer is None else outer
    inner = volume_grid(spec, scale=0.5) if inner is None else inner
    g = geometry(spec.tag)
    V = eval_field(spec, outer.nodes)
    B = biot_savart_many(spec, outer.nodes, fmt, inner)
    nv = math.sqrt(math.fsum((outer.weights * g.inner(V, V)).tolist()))
    if nv == 0:
        return 0.0
    return math.sqrt(math.fsum((outer.weights * g.inner(B, B)).tolist())) / nv


# ---------------------------------------------------------------------------
# bounds


def _check_radius(tag, R):
    tag = SpaceTag(tag)
    R = float(R)
    if not R > 0:
        raise InvalidInput("ball radius must be positive")
    if tag is SpaceTag.S3 and R > PI * (1 + 1e-12):
        raise InvalidInput("S^3 balls have radius at most pi")
    return tag, min(R, PI) if tag is SpaceTag.S3 else R


def bound_N(tag, R: float) -> float:
    tag, R = _check_radius(tag, R)
    if tag is SpaceTag.R3:
        return R
    if tag is SpaceTag.H3:
        return math.sinh(R)
    return (2 * (1 - math.cos(R)) + (PI - R) * math.sin(R)) / PI


def curl_eigen_bound(tag, R: float) -> float:
    """Lower bound ``1 / N(R)`` for curl eigenvalues on a domain of radius ``R``."""
    return 1.0 / bound_N(tag, R)


def ball_volume(tag, R: float) -> float:
    tag, R = _check_radius(tag, R)
    return _ball_volume(tag, R)


def _ball_volume(tag, R):
    if tag is SpaceTag.R3:
        return 4 / 3 * PI * R**3
    if tag is SpaceTag.H3:
        return 2 * PI * (math.sinh(R) * math.cosh(R) - R)
    return PI * (2 * R - math.sin(2 * R))


def ball_radius_for_volume(tag, vol: float, xtol: float = 1e-12) -> float:
    """Radius of the ball of volume ``vol`` (root bracketing to ``xtol``)."""
    tag = SpaceTag(tag)
    vol = float(vol)
    if not vol > 0:
        raise InvalidInput("volume must be positive")
    if tag is SpaceTag.S3:
        if vol > VOLUME_S3 * (1 + 1e-12):
            raise InvalidInput(f"S^3 has volume 2 pi^2, got {vol}")
        if vol >= VOLUME_S3:
            return PI
        hi = PI
    elif tag is SpaceTag.R3:
        return (3 * vol / (4 * PI)) ** (1 / 3)
    else:
        hi = 1.0
        while _ball_volume(tag, hi) < vol:
            hi *= 2
    return brentq(lambda r: _ball_volume(tag, r) - vol, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class DomainSpec:
    """The whole space (S^3 only) or a geodesic ball."""

    tag: SpaceTag
    kind: str = "whole_space"
    center: tuple | None = None
    R: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", SpaceTag(self.tag))
        if self.kind == "whole_space":
            if self.tag is not SpaceTag.S3:
                raise InvalidInput("only S^3 has finite volume as a whole space")
        elif self.kind == "ball":
            _check_radius(self.tag, self.R)
        else:
            raise InvalidInput(f"unknown domain kind {self.kind!r}")

    @property
    def radius(self) -> float:
        return PI if self.kind == "whole_space" else float(self.R)

    def contains_support_of(self, spec: FieldSpec) -> bool:
        if self.kind == "whole_space":
            return True
        r = spec.support_radius()
        if r is None:
            return False
        g = geometry(self.tag)
        c = g.origin() if self.center is None else np.asarray(self.center, dtype=float)
        return float(g.distance(c, spec.center_point)) + r <= self.R * (1 + 1e-12)


def domain_for(spec: FieldSpec) -> DomainSpec:
    """Smallest registered domain holding the field: its support ball or all of S^3."""
    r = spec.support_radius()
    if r is None:
        if spec.tag is not SpaceTag.S3:
            raise InvalidInput("field has no compact support")
        return DomainSpec(SpaceTag.S3)
    return DomainSpec(spec.tag, "ball", tuple(spec.center_point.tolist()), float(r))


@dataclass(frozen=True)
class BoundReport:
    helicity: float
    energy: float
    N: float
    bs_ratio: float
    helicity_ok: bool
    bs_ok: bool

    @property
    def satisfied(self) -> bool:
        return self.helicity_ok and self.bs_ok


def check_helicity_bound(spec: FieldSpec, dom: DomainSpec | None = None, fmt=None, outer: Grid | None = None,
                         inner: Grid | None = None) -> BoundReport:
    """Compare ``|H(V)|`` with ``N(R) |V|^2`` and ``|BS(V)|`` with ``N(R) |V|``."""
    dom = domain_for(spec) if dom is None else dom
    if dom.tag is not spec.tag:
        raise InvalidInput("domain and field live on different spaces")
    if not dom.contains_support_of(spec):
        raise InvalidInput("field support is not contained in the domain")
    fmt = resolve_format(spec.tag, fmt)
    if dom.kind == "ball" and outer is None:
        outer = PolarGrid.build(spec.tag, dom.center, dom.R, 6, 6, 12)
    outer = volume_grid(spec, scale=0.125) if outer is None else outer
    inner = volume_grid(spec, scale=0.5) if inner is None else inner
    energy = l2_norm(spec, outer) ** 2
    N = bound_N(spec.tag, dom.radius)
    if energy == 0:
        return BoundReport(0.0, 0.0, N, 0.0, True, True)
    H = helicity(spec, fmt, outer, "bs_pairing", inner_grid=inner).value
    ratio = bs_norm_ratio(spec, fmt, outer, inner)
    return BoundReport(H, energy, N, ratio, abs(H) <= N * energy, ratio <= N)


def curl_ratio(spec: FieldSpec, grid: Grid | None = None, method: str = "auto") -> float:
    """``|curl V| / |V|`` in L^2 on ``grid``."""
    grid = volume_grid(spec, scale=0.125) if grid is None else grid
    g = geometry(spec.tag)
    V = eval_field(spec, grid.nodes)
    C = curl(spec, grid.nodes, method=method)
    nv = math.fsum((grid.weights * g.inner(V, V)).tolist())
    if nv == 0:
        raise InvalidInput("zero field has no curl ratio")
    return math.sqrt(math.fsum((grid.weights * g.inner(C, C)).tolist()) / nv)
