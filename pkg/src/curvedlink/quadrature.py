"""Quadrature grids and integration rules.

``S3Grid``
    Hopf coordinates ``x = (cos e cos a, cos e sin a, sin e cos b, sin e sin b)``.
    The volume element ``sin e cos e de da db`` becomes ``du da db / 2`` in
    ``u = sin^2 e``; ``u`` carries Gauss-Legendre nodes and the two angles
    uniform periodic nodes, so weights sum to ``2 pi^2`` exactly.
``PolarGrid``
    Geodesic polar coordinates about a centre (used on H^3, for R^3 balls
    and for S^3 balls): Gauss-Legendre in radius and in ``cos(theta)``,
    uniform in azimuth.

Both kinds can be *recentred*: moved by a fixed isometry so that a chosen
evaluation point sits where the node pattern is symmetric about it (the
``u = 0`` circle for Hopf grids, the pole for polar grids).  Convolutions
with singular kernels always use recentred grids, so the near-singular
quadrature error is the same at every evaluation point and varies smoothly
with it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInput, NumericalFailure, TagMismatch
from .space import SpaceTag, geometry, move_origin_to, quat_mul

PI = np.pi


@dataclass(frozen=True, eq=False)
class Grid:
    tag: SpaceTag
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    def volume(self) -> float:
        return float(np.sum(self.weights))

    def spacing(self) -> float:
        raise NotImplementedError

    def recenter(self, y) -> "Grid":
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class S3Grid(Grid):
    shape: tuple = (32, 64, 64)
    u: np.ndarray = field(default=None, repr=False)

    @classmethod
    def build(cls, n_u: int = 32, n_a: int = 64, n_b: int = 64) -> "S3Grid":
        if n_b % 2:
            raise InvalidInput("the second Hopf angle needs an even node count")
        xg, wg = np.polynomial.legendre.leggauss(n_u)
        u = 0.5 * (xg + 1.0)
        wu = 0.5 * wg
        a = 2 * PI * np.arange(n_a) / n_a
        b = 2 * PI * np.arange(n_b) / n_b
        U, A, B = np.meshgrid(u, a, b, indexing="ij")
        ce, se = np.sqrt(1.0 - U), np.sqrt(U)
        nodes = np.stack([ce * np.cos(A), ce * np.sin(A), se * np.cos(B), se * np.sin(B)], axis=-1).reshape(-1, 4)
        w = np.broadcast_to(0.5 * wu[:, None, None] * (2 * PI / n_a) * (2 * PI / n_b), U.shape).reshape(-1)
        return cls(SpaceTag.S3, nodes, np.ascontiguousarray(w), (n_u, n_a, n_b), u)

    def spacing(self) -> float:
        n_u, n_a, n_b = self.shape
        du = np.max(np.diff(np.arcsin(np.sqrt(np.concatenate([[0.0], self.u, [1.0]])))))
        return float(max(du, 2 * PI / n_a, 2 * PI / n_b))

    def recenter(self, y) -> "S3Grid":
        nodes = quat_mul(np.asarray(y, dtype=float), self.nodes)
        return S3Grid(SpaceTag.S3, nodes, self.weights, self.shape, self.u)

    def refined(self, factor: float = 2.0) -> "S3Grid":
        n_u, n_a, n_b = self.shape
        return S3Grid.build(int(round(n_u * factor)), int(round(n_a * factor)), 2 * int(round(n_b * factor / 2)))


@dataclass(frozen=True, eq=False)
class PolarGrid(Grid):
    center: np.ndarray = None
    radius: float = 1.0
    shape: tuple = (24, 16, 32)

    @classmethod
    def build(cls, tag, center=None, radius: float = 1.0, n_r: int = 24, n_t: int = 16, n_p: int = 32) -> "PolarGrid":
        tag = SpaceTag(tag)
        g = geometry(tag)
        if radius <= 0:
            raise InvalidInput("polar grid radius must be positive")
        if tag is SpaceTag.S3 and radius > PI:
            raise InvalidInput("S^3 balls have radius at most pi")
        center = g.origin() if center is None else np.asarray(center, dtype=float)
        xr, wr = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * radius * (xr + 1.0)
        wr = 0.5 * radius * wr
        ct, wt = np.polynomial.legendre.leggauss(n_t)
        ph = 2 * PI * np.arange(n_p) / n_p
        R, CT, PH = np.meshgrid(r, ct, ph, indexing="ij")
        st = np.sqrt(1.0 - CT**2)
        omega = np.stack([st * np.cos(PH), st * np.sin(PH), CT], axis=-1)
        jac = {SpaceTag.S3: np.sin, SpaceTag.H3: np.sinh, SpaceTag.R3: lambda t: t}[tag](R) ** 2
        w = jac * wr[:, None, None] * wt[None, :, None] * (2 * PI / n_p)
        if tag is SpaceTag.R3:
            pts = R[..., None] * omega
        else:
            pts = np.concatenate([g.C(R)[..., None], g.S(R)[..., None] * omega], axis=-1)
        pts = move_origin_to(tag, center, pts.reshape(-1, g.dim))
        return cls(tag, np.ascontiguousarray(pts), np.ascontiguousarray(w.reshape(-1)), center, float(radius),
                   (n_r, n_t, n_p))

    def spacing(self) -> float:
        n_r, n_t, n_p = self.shape
        g = geometry(self.tag)
        S = float(g.S(self.radius)) if self.tag is not SpaceTag.S3 else 1.0
        return float(max(self.radius / n_r * 2, PI / n_t * S, 2 * PI / n_p * S))

    def exact_volume(self) -> float:
        R = self.radius
        if self.tag is SpaceTag.R3:
            return 4 / 3 * PI * R**3
        if self.tag is SpaceTag.H3:
            return 2 * PI * (np.sinh(R) * np.cosh(R) - R)
        return PI * (2 * R - np.sin(2 * R))

    def recenter(self, y) -> "PolarGrid":
        """Polar grid about ``y`` that still covers this grid's ball."""
        g = geometry(self.tag)
        reach = float(g.distance(self.center, y)) + self.radius
        if self.tag is SpaceTag.S3:
            reach = min(reach, PI)
        return PolarGrid.build(self.tag, y, reach, *self.shape)

    def refined(self, factor: float = 2.0) -> "PolarGrid":
        n = [int(round(s * factor)) for s in self.shape]
        return PolarGrid.build(self.tag, self.center, self.radius, *n)


def default_grid(tag, center=None, radius: float | None = None, scale: float = 1.0) -> Grid:
    tag = SpaceTag(tag)
    if tag is SpaceTag.S3 and radius is None:
        return S3Grid.build(int(32 * scale), int(64 * scale), 2 * int(32 * scale))
    return PolarGrid.build(tag, center, 1.0 if radius is None else radius,
                           int(24 * scale), int(16 * scale), int(32 * scale))


@dataclass(frozen=True)
class PairGrid:
    """A grid paired with itself, with pairs closer than ``r_cut`` masked."""

    grid: Grid
    r_cut: float

    @classmethod
    def build(cls, grid: Grid, r_cut: float | None = None) -> "PairGrid":
        return cls(grid, 0.5 * _min_node_gap(grid) if r_cut is None else float(r_cut))


def _min_node_gap(grid: Grid) -> float:
    # cheap lower estimate: nearest neighbour of a few nodes
    g = geometry(grid.tag)
    idx = np.linspace(0, grid.size - 1, min(grid.size, 64)).astype(int)
    best = np.inf
    for i in idx:
        d = g.distance(grid.nodes[i], grid.nodes)
        d[i] = np.inf
        best = min(best, float(d.min()))
    return best


# ---------------------------------------------------------------------------
# integration rules


def integrate_curve(curve, integrand: Callable | np.ndarray) -> float:
    """Periodic trapezoid rule in the curve parameter ``s in [0, 2 pi)``.

    ``integrand`` is either a callable ``f(curve, i_array)`` returning node
    values or an array of node values.
    """
    vals = integrand(curve, np.arange(curve.n)) if callable(integrand) else np.asarray(integrand, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure("non-finite integrand on a curve node")
    return float(np.sum(vals, axis=0) * (2 * PI / curve.n)) if vals.ndim == 1 else np.sum(vals, axis=0) * (2 * PI / curve.n)


def integrate_volume(grid: Grid, integrand: Callable | np.ndarray, mask=None):
    """Weighted sum over grid nodes; vector integrands sum componentwise."""
    vals = integrand(grid.nodes) if callable(integrand) else np.asarray(integrand, dtype=float)
    w = grid.weights if mask is None else np.where(mask, grid.weights, 0.0)
    bad = ~np.isfinite(vals)
    if vals.ndim > 1:
        bad = bad.any(axis=-1)
    if np.any(bad & (w != 0)):
        raise NumericalFailure("non-finite integrand at an unmasked node")
    vals = np.where(bad[..., None] if vals.ndim > 1 else bad, 0.0, vals)
    if vals.ndim == 1:
        return float(np.sum(w * vals))
    return np.sum(w[:, None] * vals, axis=0)


def integrate_pair(pairs: PairGrid, integrand: Callable, block: int = 512) -> float:
    """Double sum over ``grid x grid`` excluding pairs with ``alpha <= r_cut``.

    ``integrand(X, Y)`` receives broadcastable node blocks ``(b, 1, d)`` and
    ``(1, N, d)`` and returns values of shape ``(b, N)``.
    """
    grid = pairs.grid
    g = geometry(grid.tag)
    X = grid.nodes
    w = grid.weights
    partial = []
    for s in range(0, grid.size, block):
        xs = X[s:s + block, None, :]
        a = g.distance(xs, X[None, :, :])
        vals = integrand(xs, X[None, :, :])
        keep = a > pairs.r_cut
        if np.any(~np.isfinite(vals) & keep):
            raise NumericalFailure("non-finite integrand at an unmasked pair")
        vals = np.where(keep, vals, 0.0)
        partial.append(np.sum(w[s:s + block] * (vals @ w)))
    return float(np.sum(partial))


def check_tag(grid: Grid, tag) -> None:
    if grid.tag is not SpaceTag(tag):
        raise TagMismatch(f"grid lives on {grid.tag.value}, expected {SpaceTag(tag).value}")


# ---------------------------------------------------------------------------
# convergence sweeps


@dataclass(frozen=True)
class SweepRow:
    resolution: float
    value: float
    delta: float
    order: float


def convergence_sweep(computation: Callable[[float], float], resolutions: Sequence[float]) -> list[SweepRow]:
    """Evaluate ``computation`` at increasing resolutions.

    ``delta`` is the change from the previous row; ``order`` is the observed
    algebraic order ``log(delta_prev / delta) / log(res / res_prev)``.
    """
    if len(resolutions) < 2:
        raise InvalidInput("a sweep needs at least two resolutions")
    rows: list[SweepRow] = []
    prev_val = prev_delta = prev_res = None
    for r in resolutions:
        v = float(computation(r))
        delta = float("nan") if prev_val is None else abs(v - prev_val)
        order = float("nan")
        if prev_delta is not None and np.isfinite(prev_delta) and delta > 0 and prev_delta > 0:
            order = float(np.log(prev_delta / delta) / np.log(r / prev_res))
        rows.append(SweepRow(float(r), v, delta, order))
        prev_delta, prev_val, prev_res = delta, v, r
    return rows


def estimated_order(rows: Sequence[SweepRow]) -> float:
    orders = [r.order for r in rows if np.isfinite(r.order)]
    return float(orders[-1]) if orders else float("nan")
