# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rotated-cube overlap kernels (hot path of 2D cube scoring).

Same semantics as `reference`: exact Sutherland-Hodgman clipping of each
grid cell against the rotated square, zero extension outside the grid,
normalizer eps^2.
"""

from libc.math cimport cos, sin, fabs, floor
from libc.stdlib cimport malloc, free

import numpy as np


cdef struct Poly:
    double xs[16]
    double ys[16]
    int n


cdef inline void _clip_dir(Poly* src, Poly* dst, int axis, double sign, double s) noexcept nogil:
    cdef int i, j
    cdef double pc, qc, px, py, qx, qy, t
    dst.n = 0
    for i in range(src.n):
        j = i + 1
        if j == src.n:
            j = 0
        px = src.xs[i]; py = src.ys[i]
        qx = src.xs[j]; qy = src.ys[j]
        pc = (px if axis == 0 else py) * sign
        qc = (qx if axis == 0 else qy) * sign
        if pc <= s:
            dst.xs[dst.n] = px; dst.ys[dst.n] = py; dst.n += 1
        if (pc <= s) != (qc <= s):
            t = (s - pc) / (qc - pc)
            dst.xs[dst.n] = px + t * (qx - px)
            dst.ys[dst.n] = py + t * (qy - py)
            dst.n += 1


cdef inline double _clipped_area(double u0, double v0, double u1, double v1,
                                 double u2, double v2, double u3, double v3,
                                 double s) noexcept nogil:
    """Area of the quad (u0,v0)..(u3,v3) clipped to |u|<=s, |v|<=s."""
    cdef Poly a, b
    cdef int i, j
    cdef double acc
    a.n = 4
    a.xs[0] = u0; a.ys[0] = v0
    a.xs[1] = u1; a.ys[1] = v1
    a.xs[2] = u2; a.ys[2] = v2
    a.xs[3] = u3; a.ys[3] = v3
    _clip_dir(&a, &b, 0, 1.0, s)
    _clip_dir(&b, &a, 0, -1.0, s)
    _clip_dir(&a, &b, 1, 1.0, s)
    _clip_dir(&b, &a, 1, -1.0, s)
    if a.n < 3:
        return 0.0
    acc = 0.0
    for i in range(a.n):
        j = i + 1
        if j == a.n:
            j = 0
        acc += a.xs[i] * a.ys[j] - a.xs[j] * a.ys[i]
    return 0.5 * fabs(acc)


cdef int _cube_stats(const double[:, ::1] values, double ox, double oy, double h,
                     double cx, double cy, double eps, double angle,
                     double* mean_out, double* osc_out) noexcept nogil:
    cdef double s = 0.5 * eps
    cdef double ca = cos(angle), sa = sin(angle)
    cdef double rad = s * (fabs(ca) + fabs(sa))
    cdef Py_ssize_t nx = values.shape[0], ny = values.shape[1]
    cdef long i0 = <long>floor((cx - rad - ox) / h)
    cdef long i1 = <long>floor((cx + rad - ox) / h + 1e-12)
    cdef long j0 = <long>floor((cy - rad - oy) / h)
    cdef long j1 = <long>floor((cy + rad - oy) / h + 1e-12)
    if i0 < 0: i0 = 0
    if j0 < 0: j0 = 0
    if i1 > nx - 1: i1 = nx - 1
    if j1 > ny - 1: j1 = ny - 1
    cdef double area = eps * eps
    if i1 < i0 or j1 < j0:
        mean_out[0] = 0.0
        osc_out[0] = 0.0
        return 0
    cdef long ni = i1 - i0 + 1, nj = j1 - j0 + 1
    cdef double* W = <double*> malloc(ni * nj * sizeof(double))
    if W == NULL:
        return -1
    cdef long i, j
    cdef double x0, x1, y0, y1
    cdef double u00, u10, u01, u11, v00, v10, v01, v11
    cdef double umin, umax, vmin, vmax, w
    cdef double win = 0.0, wv = 0.0
    for i in range(ni):
        x0 = ox + (i0 + i) * h - cx
        x1 = x0 + h
        for j in range(nj):
            y0 = oy + (j0 + j) * h - cy
            y1 = y0 + h
            u00 = ca * x0 + sa * y0; v00 = -sa * x0 + ca * y0
            u10 = ca * x1 + sa * y0; v10 = -sa * x1 + ca * y0
            u01 = ca * x0 + sa * y1; v01 = -sa * x0 + ca * y1
            u11 = ca * x1 + sa * y1; v11 = -sa * x1 + ca * y1
            umin = min(min(u00, u10), min(u01, u11))
            umax = max(max(u00, u10), max(u01, u11))
            vmin = min(min(v00, v10), min(v01, v11))
            vmax = max(max(v00, v10), max(v01, v11))
            if umin >= -s and umax <= s and vmin >= -s and vmax <= s:
                w = h * h
            elif umin >= s or umax <= -s or vmin >= s or vmax <= -s:
                w = 0.0
            else:
                w = _clipped_area(u00, v00, u10, v10, u11, v11, u01, v01, s)
            W[i * nj + j] = w
            win += w
            wv += w * values[i0 + i, j0 + j]
    cdef double mean = wv / area
    cdef double w_out = area - win
    if w_out < 0.0:
        w_out = 0.0
    cdef double acc = w_out * fabs(mean)
    for i in range(ni):
        for j in range(nj):
            acc += W[i * nj + j] * fabs(values[i0 + i, j0 + j] - mean)
    free(W)
    mean_out[0] = mean
    osc_out[0] = acc / area
    return 0


def cube_mean_osc(const double[:, ::1] values, double ox, double oy, double h,
                  double cx, double cy, double eps, double angle):
    """Mean and mean oscillation of a 2D grid function over a rotated cube."""
    cdef double mean = 0.0, osc = 0.0
    if _cube_stats(values, ox, oy, h, cx, cy, eps, angle, &mean, &osc) != 0:
        raise MemoryError()
    return mean, osc


def batch_osc(const double[:, ::1] values, double ox, double oy, double h,
              const double[:, ::1] centers, double eps, const double[::1] angles):
    """Oscillation of many rotated cubes; centers (N, 2), angles (N,)."""
    cdef Py_ssize_t n = centers.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double mean = 0.0, osc = 0.0
    cdef Py_ssize_t k
    cdef int rc = 0
    with nogil:
        for k in range(n):
            rc = _cube_stats(values, ox, oy, h, centers[k, 0], centers[k, 1],
                             eps, angles[k], &mean, &osc)
            if rc != 0:
                break
            ov[k] = osc
    if rc != 0:
        raise MemoryError()
    return out
