# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ball-membership counting over a uniform cell list."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def count_containing_sorted(
    const double[:, ::1] points,
    const double[:, ::1] centers,
    const double[::1] radii2,
    const long[::1] starts,
    const double[::1] origin,
    double h,
    long nx, long ny, long nz,
):
    """Count, for every point, the balls (sorted by cell key) that contain it."""
    cdef Py_ssize_t n = points.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t p, j
    cdef long ix, iy, iz, cx, cy, cz, dx, dy, dz, key
    cdef double px, py, pz, ex, ey, ez
    cdef long total
    for p in range(n):
        px = points[p, 0]
        py = points[p, 1]
        pz = points[p, 2]
        ix = <long>((px - origin[0]) / h)
        iy = <long>((py - origin[1]) / h)
        iz = <long>((pz - origin[2]) / h)
        if px < origin[0]:
            ix -= 1
        if py < origin[1]:
            iy -= 1
        if pz < origin[2]:
            iz -= 1
        total = 0
        for dx in range(-1, 2):
            cx = ix + dx
            if cx < 0 or cx >= nx:
                continue
            for dy in range(-1, 2):
                cy = iy + dy
                if cy < 0 or cy >= ny:
                    continue
                for dz in range(-1, 2):
                    cz = iz + dz
                    if cz < 0 or cz >= nz:
                        continue
                    key = (cx * ny + cy) * nz + cz
                    for j in range(starts[key], starts[key + 1]):
                        ex = px - centers[j, 0]
                        ey = py - centers[j, 1]
                        ez = pz - centers[j, 2]
                        if ex * ex + ey * ey + ez * ez < radii2[j]:
                            total += 1
        out[p] = total
    return out
