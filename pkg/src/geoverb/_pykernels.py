"""Pure numpy versions of the compiled kernels in ``_ext.pyx``."""

import numpy as np


def image_source_scan(src, lst, dims, beta, max_order, fs, c, out=None):
    best = -1
    count = 0
    r = np.arange(-max_order, max_order + 1)
    pw = np.empty((6, max_order + 2))
    pw[:, 0] = 1.0
    for k in range(1, max_order + 2):
        pw[:, k] = pw[:, k - 1] * beta
    # (ny, py) and (nz, pz) grids flattened in the same order as the compiled loops
    n, p = (a.ravel() for a in np.meshgrid(r, [0, 1], indexing="ij"))
    r0, r1 = np.abs(n - p), np.abs(n)
    gy = pw[2, r0] * pw[3, r1]
    gz = pw[4, r0] * pw[5, r1]
    iy = (1 - 2 * p) * src[1] + 2 * n * dims[1]
    iz = (1 - 2 * p) * src[2] + 2 * n * dims[2]
    oy = oz = r0 + r1
    for nx in r:
        for px in (0, 1):
            rx0, rx1 = abs(nx - px), abs(nx)
            order_x = rx0 + rx1
            if order_x > max_order:
                continue
            gx = pw[0, rx0] * pw[1, rx1]
            dx = (1 - 2 * px) * src[0] + 2 * nx * dims[0] - lst[0]
            keep_y = order_x + oy <= max_order
            gxy = gx * gy[keep_y]
            dy = iy[keep_y] - lst[1]
            oxy = order_x + oy[keep_y]
            keep = (oxy[:, None] + oz[None, :]) <= max_order
            g = gxy[:, None] * gz[None, :]
            dz = iz - lst[2]
            d = np.sqrt(dx * dx + (dy * dy)[:, None] + (dz * dz)[None, :])
            keep &= g != 0.0
            g, d = g[keep], d[keep]
            if g.size == 0:
                continue
            idx = np.floor(d / c * fs + 0.5).astype(np.int64)
            if out is None:
                best = max(best, int(idx.max()))
            else:
                inside = idx < out.shape[0]
                np.add.at(out, idx[inside], g[inside] / (4.0 * np.pi * d[inside]))
                count += int(inside.sum())
    return best if out is None else count


def nearest_centroid(points, centroids, chunk=2048):
    labels = np.empty(points.shape[0], dtype=np.int64)
    for start in range(0, points.shape[0], chunk):
        diff = points[start : start + chunk, None, :] - centroids[None, :, :]
        labels[start : start + chunk] = np.argmin((diff * diff).sum(-1), axis=1)
    return labels
