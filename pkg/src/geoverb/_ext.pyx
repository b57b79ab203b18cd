# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Must stay numerically identical to ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, fabs

cnp.import_array()

cdef double PI = 3.141592653589793


cdef inline int _iabs(int v) nogil:
    return -v if v < 0 else v


def image_source_scan(double[::1] src, double[::1] lst, double[::1] dims,
                      double[::1] beta, int max_order, double fs, double c,
                      double[::1] out=None):
    """Walk every image of order <= max_order.

    With ``out=None`` returns the largest tap index among images with
    nonzero gain (or -1). Otherwise accumulates ``gain / (4 pi d)`` at the
    nearest-sample delay into ``out`` and returns the number of taps written.
    """
    cdef int nx, ny, nz, px, py, pz
    cdef int rx0, rx1, ry0, ry1, rz0, rz1, order_x, order_xy
    cdef double ix, iy, iz, dx, dy, dz, d, g, gx, gy, gz, gxy
    cdef long idx, best = -1, count = 0
    cdef long n_out = 0
    cdef bint accumulate = out is not None
    cdef int w, k
    # reflection powers by repeated multiplication, shared with the fallback
    table = np.empty((6, max_order + 2))
    cdef double[:, ::1] pw = table
    for w in range(6):
        pw[w, 0] = 1.0
        for k in range(1, max_order + 2):
            pw[w, k] = pw[w, k - 1] * beta[w]
    if accumulate:
        n_out = out.shape[0]
    for nx in range(-max_order, max_order + 1):
        for px in range(2):
            rx0 = _iabs(nx - px)
            rx1 = _iabs(nx)
            order_x = rx0 + rx1
            if order_x > max_order:
                continue
            gx = pw[0, rx0] * pw[1, rx1]
            ix = (1 - 2 * px) * src[0] + 2 * nx * dims[0]
            dx = ix - lst[0]
            for ny in range(-max_order, max_order + 1):
                for py in range(2):
                    ry0 = _iabs(ny - py)
                    ry1 = _iabs(ny)
                    order_xy = order_x + ry0 + ry1
                    if order_xy > max_order:
                        continue
                    gy = pw[2, ry0] * pw[3, ry1]
                    gxy = gx * gy
                    iy = (1 - 2 * py) * src[1] + 2 * ny * dims[1]
                    dy = iy - lst[1]
                    for nz in range(-max_order, max_order + 1):
                        for pz in range(2):
                            rz0 = _iabs(nz - pz)
                            rz1 = _iabs(nz)
                            if order_xy + rz0 + rz1 > max_order:
                                continue
                            gz = pw[4, rz0] * pw[5, rz1]
                            g = gxy * gz
                            if g == 0.0:
                                continue
                            iz = (1 - 2 * pz) * src[2] + 2 * nz * dims[2]
                            dz = iz - lst[2]
                            d = sqrt(dx * dx + dy * dy + dz * dz)
                            idx = <long>floor(d / c * fs + 0.5)
                            if accumulate:
                                if idx < n_out:
                                    out[idx] += g / (4.0 * PI * d)
                                    count += 1
                            elif idx > best:
                                best = idx
    return count if accumulate else best


def nearest_centroid(double[:, ::1] points, double[:, ::1] centroids):
    """Index of the closest centroid per row; ties go to the lowest index."""
    cdef Py_ssize_t n = points.shape[0], k = centroids.shape[0], d = points.shape[1]
    cdef Py_ssize_t i, j, m
    cdef double best, dist, diff
    cdef long arg
    labels = np.empty(n, dtype=np.int64)
    cdef long[::1] lab = labels
    for i in range(n):
        best = -1.0
        arg = 0
        for j in range(k):
            dist = 0.0
            for m in range(d):
                diff = points[i, m] - centroids[j, m]
                dist += diff * diff
            if best < 0.0 or dist < best:
                best = dist
                arg = j
        lab[i] = arg
    return labels
