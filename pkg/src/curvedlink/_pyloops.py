"""Pure numpy versions of the double-sum kernels.

Every routine returns *row sums*: entry ``i`` is the sum over the second
index ``j`` (weighted by ``w[j]`` where weights apply).  Callers combine the
rows with a deterministic ``math.fsum``.  The compiled extension
``_cloops`` implements the same signatures.
"""
from __future__ import annotations

import numpy as np

from .kernels import _c0, _c1, _ch, _gh, _gk, _k

MODE_S3_PARALLEL = 0
MODE_H3_PARALLEL = 1
MODE_S3_LEFT = 2
MODE_R3 = 3

_BLOCK_ELEMS = 1 << 20


def _block(n_cols: int) -> int:
    return max(1, _BLOCK_ELEMS // max(1, n_cols))


def _distance(mode, X, Y):
    if mode == MODE_R3:
        return np.linalg.norm(Y - X, axis=-1)
    if mode == MODE_H3_PARALLEL:
        d = Y - X
        q = -(d[..., 0] ** 2 - d[..., 1] ** 2 - d[..., 2] ** 2 - d[..., 3] ** 2)
        return 2.0 * np.arcsinh(np.sqrt(np.maximum(q, 0.0)) / 2.0)
    return 2.0 * np.arctan2(np.linalg.norm(X - Y, axis=-1), np.linalg.norm(X + Y, axis=-1))


def _grad_factor(mode, a):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if mode == MODE_S3_PARALLEL:
            return _c0 * _gk(a)
        if mode == MODE_S3_LEFT:
            return _c0 * _gh(a)
        if mode == MODE_H3_PARALLEL:
            return -_ch * np.cosh(a) / np.sinh(a) ** 3
        return -_ch / a**3


def _det4(a, b, c, d):
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    c0, c1, c2, c3 = np.moveaxis(c, -1, 0)
    d0, d1, d2, d3 = np.moveaxis(d, -1, 0)
    # Laplace expansion along the first two rows
    return ((a0 * b1 - a1 * b0) * (c2 * d3 - c3 * d2)
            - (a0 * b2 - a2 * b0) * (c1 * d3 - c3 * d1)
            + (a0 * b3 - a3 * b0) * (c1 * d2 - c2 * d1)
            + (a1 * b2 - a2 * b1) * (c0 * d3 - c3 * d0)
            - (a1 * b3 - a3 * b1) * (c0 * d2 - c2 * d0)
            + (a2 * b3 - a3 * b2) * (c0 * d1 - c1 * d0))


def _det3(a, b, c):
    return np.sum(np.cross(a, b) * c, axis=-1)


def _conj_mul_imag(p, q):
    """Imaginary part of ``conj(p) q`` for quaternion arrays."""
    p0 = p[..., :1]
    pv = p[..., 1:]
    q0 = q[..., :1]
    qv = q[..., 1:]
    return p0 * qv - q0 * pv - np.cross(pv, qv)


def link_rows(mode, X, Xd, Y, Yd, diag=False):
    """Row sums of the linking integrands (no quadrature weights).

    Returns ``(first, second)``; ``second`` is zero except in left format.
    With ``diag`` the pairs ``i == j`` are skipped (writhe on one curve).
    """
    n1, n2 = len(X), len(Y)
    first = np.zeros(n1)
    second = np.zeros(n1)
    step = _block(n2)
    if mode == MODE_S3_LEFT:
        U = _conj_mul_imag(X, Xd)
        W = _conj_mul_imag(Y, Yd)
    for s in range(0, n1, step):
        e = min(n1, s + step)
        Xb = X[s:e, None, :]
        a = _distance(mode, Xb, Y[None])
        g = _grad_factor(mode, a)
        if mode == MODE_S3_LEFT:
            Z = _conj_mul_imag(Y[None], Xb)
            f = g * np.sum(np.cross(U[s:e, None, :], W[None]) * Z, axis=-1)
            sec = -(U[s:e] @ W.T) / (4 * np.pi**2)
        elif mode == MODE_R3:
            f = -g * _det3(Xd[s:e, None, :], Yd[None], Y[None] - Xb)
            sec = None
        else:
            f = -g * _det4(Xb, Y[None], Xd[s:e, None, :], Yd[None])
            sec = None
        if diag:
            idx = np.arange(s, e)
            f[idx - s, idx] = 0.0
            if sec is not None:
                pass  # the second integrand is regular on the diagonal
        first[s:e] = np.sum(f, axis=1)
        if sec is not None:
            second[s:e] = np.sum(sec, axis=1)
    return first, second


def helicity_rows(mode, X, V, w, r_cut, div=None):
    """Row sums ``sum_j w_j f(x_i, x_j)`` of the helicity pair integrands.

    Returns an array ``(n, 3)`` holding the three left-format terms (only
    the first column is used by the parallel and Euclidean formats).  Pairs
    closer than ``r_cut`` are excluded.
    """
    n = len(X)
    out = np.zeros((n, 3))
    step = _block(n)
    if mode == MODE_S3_LEFT:
        U = _conj_mul_imag(X, V)
        divw = np.zeros(n) if div is None else np.asarray(div, dtype=float) * w
    for s in range(0, n, step):
        e = min(n, s + step)
        Xb = X[s:e, None, :]
        a = _distance(mode, Xb, X[None])
        keep = a > r_cut
        g = np.where(keep, _grad_factor(mode, np.where(keep, a, 1.0)), 0.0)
        if mode == MODE_S3_LEFT:
            Z = _conj_mul_imag(X[None], Xb)  # Im(conj(y) x)
            Wc = U[None]  # conj(y) V(y) for y = column nodes
            Ub = U[s:e, None, :]
            t1 = g * np.sum(np.cross(Ub, Wc) * Z, axis=-1)
            t2 = np.where(keep, -np.sum(Ub * Wc, axis=-1) / (4 * np.pi**2), 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                g1 = np.where(keep, 2 * _c1 * _k(np.where(keep, a, 1.0)), 0.0)
            t3 = 2 * g1 * np.sum(Ub * Z, axis=-1)
            out[s:e, 0] = t1 @ w
            out[s:e, 1] = t2 @ w
            out[s:e, 2] = t3 @ divw
        elif mode == MODE_R3:
            f = g * _det3(V[s:e, None, :], X[None] - Xb, V[None])
            out[s:e, 0] = f @ w
        else:
            f = -g * _det4(Xb, V[s:e, None, :], V[None], X[None])
            out[s:e, 0] = f @ w
    return out
