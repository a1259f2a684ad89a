# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled double-sum kernels (same signatures as ``_pyloops``).

Each routine fills row sums for rows ``r0 <= i < r1`` with Kahan-compensated
accumulation over the second index and runs without the GIL, so callers can
hand disjoint row ranges to threads.  Row sums do not depend on how the
rows are partitioned.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tan, sinh, cosh, sqrt, atan2, asinh, fabs, M_PI

cnp.import_array()

cdef int MODE_S3_PARALLEL = 0
cdef int MODE_H3_PARALLEL = 1
cdef int MODE_S3_LEFT = 2
cdef int MODE_R3 = 3

cdef double SERIES = 1e-2
cdef double C0 = -1.0 / (4.0 * M_PI * M_PI)
cdef double C1 = -1.0 / (16.0 * M_PI * M_PI)
cdef double CH = -1.0 / (4.0 * M_PI)


cdef inline double _gk(double a) noexcept nogil:
    # d/da[(pi - a) csc a] / sin a
    cdef double t = M_PI - a, t2, st
    if fabs(t) < SERIES:
        t2 = t * t
        return -1.0 / 3 + t2 * (-2.0 / 15 + t2 * (-2.0 / 63 + t2 * (-4.0 / 675 - t2 * 2.0 / 2079)))
    st = sin(t)
    return (t * cos(t) - st) / (st * st * st)


cdef inline double _gh(double a) noexcept nogil:
    # d/da[(pi - a) cot a] / sin a
    cdef double t = M_PI - a, t2, st
    if fabs(t) < SERIES:
        t2 = t * t
        return -2.0 / 3 + t2 * (-1.0 / 5 + t2 * (-17.0 / 420 + t2 * (-29.0 / 4200 - t2 * 1181.0 / 1108800)))
    st = sin(t)
    return (1.0 / tan(t) - t / (st * st)) / st


cdef inline double _k(double a) noexcept nogil:
    # (pi - a) csc a
    cdef double t = M_PI - a, t2
    if fabs(t) < SERIES:
        t2 = t * t
        return 1.0 + t2 * (1.0 / 6 + t2 * (7.0 / 360 + t2 * (31.0 / 15120 + t2 * 127.0 / 604800)))
    return t / sin(t)


cdef inline double _dist(int mode, const double* x, const double* y) noexcept nogil:
    cdef double a, b, q, d0, d1, d2, d3
    if mode == MODE_R3:
        d0 = y[0] - x[0]
        d1 = y[1] - x[1]
        d2 = y[2] - x[2]
        return sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    d0 = y[0] - x[0]
    d1 = y[1] - x[1]
    d2 = y[2] - x[2]
    d3 = y[3] - x[3]
    if mode == MODE_H3_PARALLEL:
        q = -(d0 * d0 - d1 * d1 - d2 * d2 - d3 * d3)
        if q < 0:
            q = 0
        return 2.0 * asinh(sqrt(q) / 2.0)
    a = sqrt(d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3)
    d0 = y[0] + x[0]
    d1 = y[1] + x[1]
    d2 = y[2] + x[2]
    d3 = y[3] + x[3]
    b = sqrt(d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3)
    return 2.0 * atan2(a, b)


cdef inline double _gfac(int mode, double a) noexcept nogil:
    cdef double sh
    if mode == MODE_S3_PARALLEL:
        return C0 * _gk(a)
    if mode == MODE_S3_LEFT:
        return C0 * _gh(a)
    if mode == MODE_H3_PARALLEL:
        sh = sinh(a)
        return -CH * cosh(a) / (sh * sh * sh)
    return -CH / (a * a * a)


cdef inline double _det4(const double* a, const double* b, const double* c, const double* d) noexcept nogil:
    return ((a[0] * b[1] - a[1] * b[0]) * (c[2] * d[3] - c[3] * d[2])
            - (a[0] * b[2] - a[2] * b[0]) * (c[1] * d[3] - c[3] * d[1])
            + (a[0] * b[3] - a[3] * b[0]) * (c[1] * d[2] - c[2] * d[1])
            + (a[1] * b[2] - a[2] * b[1]) * (c[0] * d[3] - c[3] * d[0])
            - (a[1] * b[3] - a[3] * b[1]) * (c[0] * d[2] - c[2] * d[0])
            + (a[2] * b[3] - a[3] * b[2]) * (c[0] * d[1] - c[1] * d[0]))


cdef inline double _det3(const double* a, const double* b, double c0, double c1, double c2) noexcept nogil:
    return ((a[1] * b[2] - a[2] * b[1]) * c0
            + (a[2] * b[0] - a[0] * b[2]) * c1
            + (a[0] * b[1] - a[1] * b[0]) * c2)


cdef inline void _conj_mul_imag(const double* p, const double* q, double* out) noexcept nogil:
    # imaginary part of conj(p) q
    out[0] = p[0] * q[1] - q[0] * p[1] - (p[2] * q[3] - p[3] * q[2])
    out[1] = p[0] * q[2] - q[0] * p[2] - (p[3] * q[1] - p[1] * q[3])
    out[2] = p[0] * q[3] - q[0] * p[3] - (p[1] * q[2] - p[2] * q[1])


cdef inline double _cross_dot(const double* u, const double* w, const double* z) noexcept nogil:
    return ((u[1] * w[2] - u[2] * w[1]) * z[0]
            + (u[2] * w[0] - u[0] * w[2]) * z[1]
            + (u[0] * w[1] - u[1] * w[0]) * z[2])


def link_rows_range(int mode, const double[:, ::1] X, const double[:, ::1] Xd, const double[:, ::1] Y,
                    const double[:, ::1] Yd,
                    bint diag, Py_ssize_t r0, Py_ssize_t r1, double[::1] first, double[::1] second):
    cdef Py_ssize_t i, j, n2 = Y.shape[0]
    cdef double a, g, f, s1, c1, t, s2, c2, y2
    cdef double u[3]
    cdef double w[3]
    cdef double z[3]
    with nogil:
        for i in range(r0, r1):
            s1 = 0.0
            c1 = 0.0
            s2 = 0.0
            c2 = 0.0
            if mode == MODE_S3_LEFT:
                _conj_mul_imag(&X[i, 0], &Xd[i, 0], u)
            for j in range(n2):
                if mode == MODE_S3_LEFT:
                    # the second integrand is regular, diagonal included
                    _conj_mul_imag(&Y[j, 0], &Yd[j, 0], w)
                    y2 = -(u[0] * w[0] + u[1] * w[1] + u[2] * w[2]) / (4.0 * M_PI * M_PI)
                    t = y2 - c2
                    a = s2 + t
                    c2 = (a - s2) - t
                    s2 = a
                if diag and i == j:
                    continue
                a = _dist(mode, &X[i, 0], &Y[j, 0])
                g = _gfac(mode, a)
                if mode == MODE_S3_LEFT:
                    _conj_mul_imag(&Y[j, 0], &X[i, 0], z)
                    f = g * _cross_dot(u, w, z)
                elif mode == MODE_R3:
                    f = -g * _det3(&Xd[i, 0], &Yd[j, 0], Y[j, 0] - X[i, 0], Y[j, 1] - X[i, 1], Y[j, 2] - X[i, 2])
                else:
                    f = -g * _det4(&X[i, 0], &Y[j, 0], &Xd[i, 0], &Yd[j, 0])
                t = f - c1
                a = s1 + t
                c1 = (a - s1) - t
                s1 = a
            first[i] = s1
            second[i] = s2


def helicity_rows_range(int mode, const double[:, ::1] X, const double[:, ::1] V, const double[::1] w, double r_cut,
                        const double[::1] divw, Py_ssize_t r0, Py_ssize_t r1, double[:, ::1] out):
    cdef Py_ssize_t i, j, m, n = X.shape[0]
    cdef double a, g, g1, f, t, tmp, uz
    cdef double s[3]
    cdef double c[3]
    cdef double val[3]
    cdef double u[3]
    cdef double uw[3]
    cdef double z[3]
    with nogil:
        for i in range(r0, r1):
            for m in range(3):
                s[m] = 0.0
                c[m] = 0.0
            if mode == MODE_S3_LEFT:
                _conj_mul_imag(&X[i, 0], &V[i, 0], u)
            for j in range(n):
                a = _dist(mode, &X[i, 0], &X[j, 0])
                if a <= r_cut:
                    continue
                g = _gfac(mode, a)
                val[1] = 0.0
                val[2] = 0.0
                if mode == MODE_S3_LEFT:
                    _conj_mul_imag(&X[j, 0], &V[j, 0], uw)
                    _conj_mul_imag(&X[j, 0], &X[i, 0], z)
                    val[0] = w[j] * g * _cross_dot(u, uw, z)
                    val[1] = -w[j] * (u[0] * uw[0] + u[1] * uw[1] + u[2] * uw[2]) / (4.0 * M_PI * M_PI)
                    g1 = 2.0 * C1 * _k(a)
                    uz = u[0] * z[0] + u[1] * z[1] + u[2] * z[2]
                    val[2] = 2.0 * g1 * uz * divw[j]
                elif mode == MODE_R3:
                    # det(V_i, x_j - x_i, V_j) = -det(V_i, V_j, x_j - x_i)
                    val[0] = -w[j] * g * _det3(&V[i, 0], &V[j, 0], X[j, 0] - X[i, 0], X[j, 1] - X[i, 1],
                                               X[j, 2] - X[i, 2])
                else:
                    val[0] = -w[j] * g * _det4(&X[i, 0], &V[i, 0], &V[j, 0], &X[j, 0])
                for m in range(3):
                    t = val[m] - c[m]
                    tmp = s[m] + t
                    c[m] = (tmp - s[m]) - t
                    s[m] = tmp
            for m in range(3):
                out[i, m] = s[m]
